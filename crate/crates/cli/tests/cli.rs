use std::path::Path;
use std::process::{Command, Output};

use foveate_cli::formats::{fixation_log_to_string, write_bytes};
use foveate_cli::png::{read_png, write_png};
use foveate_cli::synth::{class_scene, synthetic_fixations, SyntheticObservation};
use foveate_core::Image;

const SMALL: [&str; 8] = [
    "--set",
    "node_count=1500",
    "--set",
    "retina_radius_px=40",
    "--set",
    "crop_size=80",
    "--set",
    "cortical_dims=48x90",
];

fn foveate(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_foveate"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn bench_prints_default_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let o = foveate(dir.path(), &["bench"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    for figure in ["2.858", "11.46", "10.81", "17.15", "13.47"] {
        assert!(text.contains(figure), "missing {figure} in\n{text}");
    }
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = foveate(dir.path(), &["--set", "no_such_key=3", "bench"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no_such_key"));

    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "# geometry\nnode_count = 100\ncrop_size = many\n").unwrap();
    let o = foveate(dir.path(), &["--config", cfg.to_str().unwrap(), "bench"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.conf:3:"), "{}", stderr(&o));
}

#[test]
fn sample_then_cortical_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let img = Image::from_fn(80, 80, 3, |r, c, ch| ((r + 2 * c + 3 * ch) % 17) as f64 / 16.0);
    write_png(&d.join("crop.png"), &img).unwrap();

    let mut args: Vec<&str> = SMALL.to_vec();
    args.extend(["tessellate", "-o", "retina.txt"]);
    let o = foveate(d, &args);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("1500 nodes"));

    let tess = d.join("retina.txt");
    let crop = d.join("crop.png");
    let mut args: Vec<&str> = SMALL.to_vec();
    args.extend(["sample", "--image", crop.to_str().unwrap(), "--tessellation", tess.to_str().unwrap(), "-o", "crop.iv"]);
    let o = foveate(d, &args);
    assert!(o.status.success(), "{}", stderr(&o));

    let iv = d.join("crop.iv");
    let mut args: Vec<&str> = SMALL.to_vec();
    args.extend(["cortical", "--vector", iv.to_str().unwrap(), "--tessellation", tess.to_str().unwrap(), "--weights", "c.w"]);
    let o = foveate(d, &args);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(read_png(&d.join("cortical.png")).unwrap().dims(), (48, 90));
    assert!(d.join("c.w").is_file());

    let mut args: Vec<&str> = SMALL.to_vec();
    args.extend(["subsample", "--input", "cortical.png", "--weights", "c.w", "--factor", "2"]);
    let o = Command::new(env!("CARGO_BIN_EXE_foveate")).current_dir(d).args(&args).output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(read_png(&d.join("subsampled.png")).unwrap().dims(), (24, 45));
}

#[test]
fn viz_tessellation_has_requested_size() {
    let dir = tempfile::tempdir().unwrap();
    let o = foveate(dir.path(), &["--set", "node_count=300", "viz", "tessellation", "--size", "120"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let img = read_png(&dir.path().join("viz.png")).unwrap();
    assert_eq!(img.dims(), (120, 120));
}

fn write_class(dir: &Path, class: &str, index: usize, write_image: bool) -> String {
    let scene = class_scene(index, 160, 200, 3);
    if write_image {
        write_png(&dir.join(format!("images/{class}.png")), &scene).unwrap();
    }
    let obs = [SyntheticObservation {
        id: format!("{class}_0"),
        offset: [0.0, 0.0],
        image_path: format!("{class}.png"),
    }];
    let recs = synthetic_fixations(class, &[[80.0, 100.0]], 120, 8.0, &obs, index as u64);
    let log = dir.join(format!("{class}.csv"));
    write_bytes(&log, fixation_log_to_string(&recs).as_bytes()).unwrap();
    log.to_str().unwrap().to_string()
}

#[test]
fn pipeline_writes_manifest_and_reports_missing_images() {
    let input = tempfile::tempdir().unwrap();
    let a = write_class(input.path(), "Apple", 0, true);
    let b = write_class(input.path(), "Bread", 1, true);
    let images = input.path().join("images");
    let out = tempfile::tempdir().unwrap();
    let mut args: Vec<&str> = SMALL.to_vec();
    args.extend(["--set", "classes=Apple,Bread", "pipeline", "--log", &a, "--log", &b, "--images", images.to_str().unwrap()]);
    let o = foveate(out.path(), &args);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("Apple: 1 clusters"));
    let manifest = std::fs::read_to_string(out.path().join("manifest.csv")).unwrap();
    assert_eq!(manifest.lines().count(), 3);
    assert!(out.path().join("Bread/cluster_000.png").is_file());

    let c = write_class(input.path(), "Cheese", 2, false);
    let out = tempfile::tempdir().unwrap();
    let mut args: Vec<&str> = SMALL.to_vec();
    args.extend([
        "--set",
        "classes=Apple,Bread,Cheese",
        "pipeline",
        "--log",
        &a,
        "--log",
        &c,
        "--images",
        images.to_str().unwrap(),
    ]);
    let o = foveate(out.path(), &args);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("Cheese.png") && err.contains("Cheese"), "{err}");
    // The healthy class still produced its artifacts.
    assert!(out.path().join("Apple/cluster_000.png").is_file());
}

#[test]
fn unknown_class_label_names_the_line() {
    let input = tempfile::tempdir().unwrap();
    let a = write_class(input.path(), "Apple", 0, true);
    let out = tempfile::tempdir().unwrap();
    let o = foveate(
        out.path(),
        &["--set", "classes=Bread", "pipeline", "--log", &a, "--images", input.path().to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Apple.csv:2:"), "{}", stderr(&o));
}

#[test]
fn split_train_eval_on_tiny_images() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut items = String::new();
    for i in 0..40 {
        let class = if i % 2 == 0 { "dark" } else { "light" };
        let level = if i % 2 == 0 { 0.1 } else { 0.9 };
        write_png(&d.join(format!("img/{i}.png")), &Image::filled(12, 12, 3, level)).unwrap();
        items.push_str(&format!("img/{i}.png,{class}\n"));
    }
    std::fs::write(d.join("items.csv"), items).unwrap();
    let net = [
        "--set",
        "classes=dark,light",
        "--set",
        "num_classes=2",
        "--set",
        "conv_filters=2",
        "--set",
        "fc_widths=4",
        "--set",
        "batch_size=4",
        "--set",
        "epochs=2",
    ];

    let o = foveate(d, &["split", "--items", d.join("items.csv").to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("dark: train 16, val 4, test 0"), "{}", stdout(&o));

    let manifest = d.join("manifest.csv");
    let mut args = net.to_vec();
    args.extend(["train", "--manifest", manifest.to_str().unwrap()]);
    let o = foveate(d, &args);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("epoch")).count(), 2);
    let log = std::fs::read_to_string(d.join("training_log.csv")).unwrap();
    assert_eq!(log.lines().count(), 1 + 2 * (32 / 4));

    let model = d.join("model.fnet");
    let mut args = net.to_vec();
    args.extend(["eval", "--manifest", manifest.to_str().unwrap(), "--model", model.to_str().unwrap(), "--split", "val"]);
    let o = foveate(d, &args);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("accuracy"), "{}", stdout(&o));
}
