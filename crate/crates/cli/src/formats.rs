//! On-disk formats: tessellations, imagevectors, cortical weights, fixation
//! logs, homographies, manifests, checkpoints and training logs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use foveate_core::cortex::CorticalImage;
use foveate_core::dcnn::{build_network, Network, NetworkSpec, Padding};
use foveate_core::gaze::{DatasetManifest, FixationRecord, Homography, ManifestEntry, Split};
use foveate_core::retina::{ImageVector, Tessellation};

use crate::error::{CliError, Result};
use crate::png::ensure_parent;

pub const FIXATION_HEADER: &str = "observation_id,frame_index,timestamp_ms,gaze_row,gaze_col,class_label,image_path";
pub const MANIFEST_HEADER: &str = "path,class_label,split";
pub const TRAINING_LOG_HEADER: &str = "epoch,step,loss,accuracy";

const IV_MAGIC: &[u8; 4] = b"RIV1";
const WEIGHTS_MAGIC: &[u8; 4] = b"CWT1";
const CHECKPOINT_MAGIC: &[u8; 5] = b"FNET1";

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    ensure_parent(path)?;
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

/// Data lines with their 1-based line numbers, skipping blanks.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
}

fn parse_num<T: std::str::FromStr>(path: &Path, line: usize, field: &str, what: &str) -> Result<T> {
    field
        .trim()
        .parse()
        .map_err(|_| CliError::parse(path, line, format!("invalid {what} {field:?}")))
}

// Tessellation

pub fn tessellation_to_string(tess: &Tessellation) -> String {
    let mut s = format!("RETINA v1 {} {}\n", tess.node_count(), tess.fovea_radius());
    for [x, y] in tess.nodes() {
        writeln!(s, "{x} {y}").unwrap();
    }
    s
}

pub fn write_tessellation(path: &Path, tess: &Tessellation) -> Result<()> {
    write_bytes(path, tessellation_to_string(tess).as_bytes())
}

pub fn read_tessellation(path: &Path) -> Result<Tessellation> {
    let text = read_text(path)?;
    let mut it = lines(&text);
    let (line, header) = it.next().ok_or_else(|| CliError::parse(path, 1, "empty tessellation file"))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "RETINA" || parts[1] != "v1" {
        return Err(CliError::parse(path, line, "expected `RETINA v1 <node_count> <fovea_radius>`"));
    }
    let count: usize = parse_num(path, line, parts[2], "node count")?;
    let fovea: f64 = parse_num(path, line, parts[3], "fovea radius")?;
    let mut nodes = Vec::with_capacity(count);
    for (line, l) in it {
        let xy: Vec<&str> = l.split_whitespace().collect();
        if xy.len() != 2 {
            return Err(CliError::parse(path, line, format!("expected `x y`, found {} fields", xy.len())));
        }
        nodes.push([parse_num(path, line, xy[0], "x")?, parse_num(path, line, xy[1], "y")?]);
    }
    if nodes.len() != count {
        return Err(CliError::parse(
            path,
            line,
            format!("header promises {count} nodes, file has {}", nodes.len()),
        ));
    }
    Tessellation::from_nodes(nodes, fovea).map_err(|e| CliError::parse(path, line, e.to_string()))
}

// Imagevectors and cortical weights share one binary layout.

fn encode_masked(magic: &[u8; 4], count: usize, channels: usize, mask: &[bool], values: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + mask.len() + values.len() * 4);
    out.extend_from_slice(magic);
    out.extend_from_slice(&(count as u32).to_le_bytes());
    out.extend_from_slice(&(channels as u32).to_le_bytes());
    out.extend_from_slice(&(mask.len() as u32).to_le_bytes());
    out.extend(mask.iter().map(|&m| m as u8));
    for &v in values {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

struct Masked {
    count: usize,
    channels: usize,
    mask: Vec<bool>,
    values: Vec<f64>,
}

fn decode_masked(path: &Path, magic: &[u8; 4], bytes: &[u8]) -> Result<Masked> {
    let bad = |msg: String| CliError::parse(path, 0, msg);
    if bytes.len() < 16 || &bytes[..4] != magic {
        return Err(bad(format!("missing {} header", String::from_utf8_lossy(magic))));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    let (count, channels, mask_len) = (word(4), word(8), word(12));
    if mask_len != count {
        return Err(bad(format!("mask length {mask_len} does not match count {count}")));
    }
    let expected = 16 + mask_len + count * channels * 4;
    if bytes.len() != expected {
        return Err(bad(format!("expected {expected} bytes, found {}", bytes.len())));
    }
    let mask = bytes[16..16 + mask_len].iter().map(|&b| b != 0).collect();
    let values = bytes[16 + mask_len..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    Ok(Masked {
        count,
        channels,
        mask,
        values,
    })
}

pub fn encode_image_vector(iv: &ImageVector) -> Vec<u8> {
    encode_masked(IV_MAGIC, iv.node_count(), iv.channels(), iv.valid(), iv.values())
}

pub fn write_image_vector(path: &Path, iv: &ImageVector) -> Result<()> {
    write_bytes(path, &encode_image_vector(iv))
}

/// Values come back at `f32` precision.
pub fn read_image_vector(path: &Path) -> Result<ImageVector> {
    let m = decode_masked(path, IV_MAGIC, &read_bytes(path)?)?;
    Ok(ImageVector::new(m.count, m.channels, m.values, m.mask)?)
}

pub fn write_cortical_weights(path: &Path, img: &CorticalImage) -> Result<()> {
    let (rows, cols) = img.dims();
    let mask: Vec<bool> = img.weights.iter().map(|&w| w > 0.0).collect();
    write_bytes(path, &encode_masked(WEIGHTS_MAGIC, rows * cols, 1, &mask, &img.weights))
}

pub fn read_cortical_weights(path: &Path) -> Result<Vec<f64>> {
    let m = decode_masked(path, WEIGHTS_MAGIC, &read_bytes(path)?)?;
    if m.channels != 1 {
        return Err(CliError::parse(path, 0, "weight files carry one channel"));
    }
    Ok(m.values)
}

// Fixation logs

fn parse_fixation_row(path: &Path, line: usize, row: &str) -> Result<FixationRecord> {
    let f: Vec<&str> = row.split(',').collect();
    if f.len() != 7 {
        return Err(CliError::parse(path, line, format!("expected 7 fields, found {}", f.len())));
    }
    let gaze_px = [
        parse_num::<f64>(path, line, f[3], "gaze_row")?,
        parse_num::<f64>(path, line, f[4], "gaze_col")?,
    ];
    if !(gaze_px[0].is_finite() && gaze_px[1].is_finite()) {
        return Err(CliError::parse(path, line, "gaze coordinates must be finite"));
    }
    let class_label = f[5].trim();
    if class_label.is_empty() {
        return Err(CliError::parse(path, line, "empty class_label"));
    }
    if f[0].trim().is_empty() {
        return Err(CliError::parse(path, line, "empty observation_id"));
    }
    Ok(FixationRecord {
        observation_id: f[0].trim().to_string(),
        frame_index: parse_num(path, line, f[1], "frame_index")?,
        timestamp_ms: parse_num(path, line, f[2], "timestamp_ms")?,
        gaze_px,
        class_label: class_label.to_string(),
        image_path: f[6].trim().to_string(),
    })
}

/// Parses a fixation CSV. With `classes`, labels outside that list are a
/// validation error.
pub fn parse_fixation_log(path: &Path, classes: Option<&[String]>) -> Result<Vec<FixationRecord>> {
    let text = read_text(path)?;
    let mut it = lines(&text);
    match it.next() {
        Some((_, h)) if h.trim() == FIXATION_HEADER => {}
        Some((line, _)) => return Err(CliError::parse(path, line, format!("expected header `{FIXATION_HEADER}`"))),
        None => return Err(CliError::parse(path, 1, "missing header")),
    }
    let mut records = Vec::new();
    for (line, row) in it {
        let rec = parse_fixation_row(path, line, row)?;
        if let Some(classes) = classes {
            if !classes.iter().any(|c| *c == rec.class_label) {
                return Err(CliError::Validation(format!(
                    "{}:{line}: unknown class label {:?}",
                    path.display(),
                    rec.class_label
                )));
            }
        }
        records.push(rec);
    }
    Ok(records)
}

pub fn fixation_log_to_string(records: &[FixationRecord]) -> String {
    let mut s = format!("{FIXATION_HEADER}\n");
    for r in records {
        writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.observation_id, r.frame_index, r.timestamp_ms, r.gaze_px[0], r.gaze_px[1], r.class_label, r.image_path
        )
        .unwrap();
    }
    s
}

// Homographies

/// `observation_id h00 h01 ... h22` per line; `#` starts a comment line.
pub fn parse_homographies(path: &Path) -> Result<BTreeMap<String, Homography>> {
    let text = read_text(path)?;
    let mut out = BTreeMap::new();
    for (line, l) in lines(&text) {
        if l.trim_start().starts_with('#') {
            continue;
        }
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 10 {
            return Err(CliError::parse(path, line, format!("expected id and 9 numbers, found {} fields", f.len())));
        }
        let mut m = [[0.0; 3]; 3];
        for (i, v) in f[1..].iter().enumerate() {
            m[i / 3][i % 3] = parse_num(path, line, v, "matrix entry")?;
        }
        let h = Homography::from_matrix(m).map_err(|e| CliError::parse(path, line, e.to_string()))?;
        if out.insert(f[0].to_string(), h).is_some() {
            return Err(CliError::parse(path, line, format!("duplicate observation {}", f[0])));
        }
    }
    Ok(out)
}

pub fn homographies_to_string(hs: &BTreeMap<String, Homography>) -> String {
    let mut s = String::new();
    for (id, h) in hs {
        s.push_str(id);
        for v in h.matrix().iter().flatten() {
            write!(s, " {v}").unwrap();
        }
        s.push('\n');
    }
    s
}

// Manifests

pub fn manifest_to_string(manifest: &DatasetManifest) -> String {
    let mut s = format!("{MANIFEST_HEADER}\n");
    for e in &manifest.entries {
        writeln!(s, "{},{},{}", e.path, e.label, e.split).unwrap();
    }
    s
}

pub fn write_manifest(path: &Path, manifest: &DatasetManifest) -> Result<()> {
    write_bytes(path, manifest_to_string(manifest).as_bytes())
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let text = read_text(path)?;
    let mut it = lines(&text);
    match it.next() {
        Some((_, h)) if h.trim() == MANIFEST_HEADER => {}
        Some((line, _)) => return Err(CliError::parse(path, line, format!("expected header `{MANIFEST_HEADER}`"))),
        None => return Err(CliError::parse(path, 1, "missing header")),
    }
    it.map(|(line, row)| {
        let f: Vec<&str> = row.split(',').collect();
        if f.len() != 3 {
            return Err(CliError::parse(path, line, format!("expected 3 fields, found {}", f.len())));
        }
        let split: Split = f[2]
            .trim()
            .parse()
            .map_err(|_| CliError::parse(path, line, format!("unknown split {:?}", f[2])))?;
        Ok(ManifestEntry {
            path: f[0].trim().to_string(),
            label: f[1].trim().to_string(),
            split,
        })
    })
    .collect()
}

/// `path,class_label` rows, header optional.
pub fn read_labeled_items(path: &Path) -> Result<Vec<(String, String)>> {
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (line, row) in lines(&text) {
        let f: Vec<&str> = row.split(',').collect();
        if f.len() < 2 {
            return Err(CliError::parse(path, line, "expected `path,class_label`"));
        }
        if line == 1 && f[0].trim() == "path" {
            continue;
        }
        out.push((f[0].trim().to_string(), f[1].trim().to_string()));
    }
    Ok(out)
}

// Checkpoints

fn put_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u32).to_le_bytes());
}

/// `FNET1`, input shape, spec, parameter count, then `f32` parameters.
pub fn encode_checkpoint(net: &Network<f32>) -> Vec<u8> {
    let spec = net.spec();
    let (h, w, c) = net.input_shape();
    let mut out = CHECKPOINT_MAGIC.to_vec();
    for v in [h, w, c, spec.kernel, spec.pool, spec.num_classes] {
        put_u32(&mut out, v);
    }
    out.push(match spec.padding {
        Padding::Same => 0,
        Padding::Valid => 1,
    });
    out.extend_from_slice(&spec.dropout_rate.to_le_bytes());
    put_u32(&mut out, spec.conv_filters.len());
    spec.conv_filters.iter().for_each(|&f| put_u32(&mut out, f));
    put_u32(&mut out, spec.fc_widths.len());
    spec.fc_widths.iter().for_each(|&f| put_u32(&mut out, f));
    out.extend_from_slice(&(net.parameter_count() as u64).to_le_bytes());
    for p in net.parameters() {
        for v in p {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn write_checkpoint(path: &Path, net: &Network<f32>) -> Result<()> {
    write_bytes(path, &encode_checkpoint(net))
}

struct Reader<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(CliError::parse(self.path, 0, "checkpoint is truncated"));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }

    fn list(&mut self) -> Result<Vec<usize>> {
        let n = self.u32()?;
        if n > 1 << 16 {
            return Err(CliError::parse(self.path, 0, "implausible layer count"));
        }
        (0..n).map(|_| self.u32()).collect()
    }
}

pub fn read_checkpoint(path: &Path) -> Result<Network<f32>> {
    let bytes = read_bytes(path)?;
    let mut r = Reader {
        path,
        bytes: &bytes,
        pos: 0,
    };
    if r.take(5)? != CHECKPOINT_MAGIC {
        return Err(CliError::parse(path, 0, "not an FNET1 checkpoint"));
    }
    let (h, w, c) = (r.u32()?, r.u32()?, r.u32()?);
    let (kernel, pool, num_classes) = (r.u32()?, r.u32()?, r.u32()?);
    let padding = match r.take(1)?[0] {
        0 => Padding::Same,
        1 => Padding::Valid,
        p => return Err(CliError::parse(path, 0, format!("unknown padding code {p}"))),
    };
    let dropout_rate = f64::from_le_bytes(r.take(8)?.try_into().unwrap());
    let conv_filters = r.list()?;
    let fc_widths = r.list()?;
    let spec = NetworkSpec {
        conv_filters,
        kernel,
        pool,
        fc_widths,
        num_classes,
        dropout_rate,
        padding,
    };
    let mut net = build_network::<f32>(&spec, (h, w, c), 0)?;
    let count = u64::from_le_bytes(r.take(8)?.try_into().unwrap()) as usize;
    if count != net.parameter_count() {
        return Err(CliError::parse(
            path,
            0,
            format!("checkpoint has {count} parameters, spec needs {}", net.parameter_count()),
        ));
    }
    for p in net.parameters_mut() {
        for v in p.iter_mut() {
            *v = f32::from_le_bytes(r.take(4)?.try_into().unwrap());
        }
    }
    if r.pos != bytes.len() {
        return Err(CliError::parse(path, 0, "trailing bytes after parameters"));
    }
    Ok(net)
}
