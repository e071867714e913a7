use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mefuse::hdrio::{
    load_rgbe, save_ldr, save_rgbe, synth_exposures, write_ldr, LdrFormat, RadianceMap,
};
use mefuse::{fuse, ExposureStack, PipelineConfig, RgbImage};
use tempfile::TempDir;

fn mefuse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mefuse"))
        .args(args)
        .env_remove("MEFUSE_THREADS")
        .output()
        .expect("failed to launch mefuse")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/testdata/hdr")
        .join(format!("{name}.hdr"))
}

fn crop(map: &RadianceMap, x0: usize, y0: usize, w: usize, h: usize) -> RadianceMap {
    let pixels = (0..w * h)
        .map(|i| map.pixels()[(y0 + i / w) * map.width() + x0 + i % w])
        .collect();
    RadianceMap::new(w, h, pixels).unwrap()
}

/// Small 72x64 HDR cut from a bundled scene.
fn small_hdr(dir: &Path, name: &str) -> PathBuf {
    let map = crop(&load_rgbe(bundled("desk_lamp")).unwrap(), 150, 300, 72, 64);
    let path = dir.join(format!("{name}.hdr"));
    save_rgbe(&path, &map).unwrap();
    path
}

/// Writes an exposure stack as PNGs named `<prefix>_<k>.png`, darkest first.
fn write_stack(dir: &Path, prefix: &str, stack: &ExposureStack) -> Vec<PathBuf> {
    stack
        .images()
        .iter()
        .enumerate()
        .map(|(k, img)| {
            let p = dir.join(format!("{prefix}_{k}.png"));
            save_ldr(&p, img).unwrap();
            p
        })
        .collect()
}

fn small_stack() -> ExposureStack {
    let map = crop(&load_rgbe(bundled("desk_window")).unwrap(), 100, 40, 64, 48);
    synth_exposures(&map, &[-1.0, 0.0, 1.0], 0.18).unwrap()
}

fn as_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_table(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        ["image", "metric", "backend", "input", "original", "proposed"]
    );
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect()
}

fn row<'a>(rows: &'a [Vec<String>], metric: &str) -> &'a [String] {
    rows.iter().find(|r| r[1] == metric).unwrap()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn fuse_three_inputs_writes_png() {
    let dir = TempDir::new().unwrap();
    let inputs = write_stack(dir.path(), "shot", &small_stack());
    let out = dir.path().join("fused.png");
    let mut args: Vec<&str> = vec!["fuse", "-o", as_str(&out)];
    args.extend(inputs.iter().map(|p| as_str(p)));
    let res = mefuse(&args);
    assert!(res.status.success(), "{}", stderr(&res));
    let img = mefuse::hdrio::load_ldr(&out).unwrap();
    assert_eq!(img.dimensions(), (64, 48));
}

#[test]
fn fuse_without_inputs_is_usage_error() {
    let res = mefuse(&["fuse", "-o", "never.png"]);
    assert_eq!(res.status.code(), Some(1));
    assert!(stderr(&res).contains("Usage"), "{}", stderr(&res));
}

#[test]
fn fuse_missing_file_is_one_line_error() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("o.png");
    let res = mefuse(&["fuse", "-o", as_str(&out), "/no/such/file.png"]);
    assert_eq!(res.status.code(), Some(1));
    let err = stderr(&res);
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(err.starts_with("error: "));
    assert!(!out.exists());
}

#[test]
fn skip_enhance_equals_backend_only_fusion() {
    let dir = TempDir::new().unwrap();
    let stack = small_stack();
    let inputs = write_stack(dir.path(), "shot", &stack);
    let out = dir.path().join("orig.png");
    let mut args: Vec<&str> = vec!["fuse", "--skip-enhance", "-o", as_str(&out)];
    args.extend(inputs.iter().rev().map(|p| as_str(p)));
    let res = mefuse(&args);
    assert!(res.status.success(), "{}", stderr(&res));

    let reloaded: Vec<RgbImage> = inputs
        .iter()
        .map(|p| mefuse::hdrio::load_ldr(p).unwrap())
        .collect();
    let direct = fuse::fuse(
        &ExposureStack::new(reloaded).unwrap(),
        &PipelineConfig::default(),
    )
    .unwrap();
    let expected = write_ldr(&direct, LdrFormat::Png).unwrap();
    assert_eq!(std::fs::read(&out).unwrap(), expected);

    // and it differs from the enhanced result
    let enhanced = dir.path().join("prop.png");
    let mut args: Vec<&str> = vec!["fuse", "-o", as_str(&enhanced)];
    args.extend(inputs.iter().map(|p| as_str(p)));
    assert!(mefuse(&args).status.success());
    assert_ne!(std::fs::read(&enhanced).unwrap(), expected);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = TempDir::new().unwrap();
    let inputs = write_stack(dir.path(), "shot", &small_stack());
    let cfg = dir.path().join("run.cfg");
    let via_cfg = dir.path().join("via_cfg.png");
    std::fs::write(
        &cfg,
        format!(
            "# baseline run\nskip_enhance = true\noutput = {}\n",
            as_str(&via_cfg)
        ),
    )
    .unwrap();
    let mut args: Vec<&str> = vec!["fuse", "--config", as_str(&cfg)];
    args.extend(inputs.iter().map(|p| as_str(p)));
    let res = mefuse(&args);
    assert!(res.status.success(), "{}", stderr(&res));

    let via_flag = dir.path().join("via_flag.png");
    let mut args: Vec<&str> = vec!["fuse", "--skip-enhance", "-o", as_str(&via_flag)];
    args.extend(inputs.iter().map(|p| as_str(p)));
    assert!(mefuse(&args).status.success());
    assert_eq!(
        std::fs::read(&via_cfg).unwrap(),
        std::fs::read(&via_flag).unwrap()
    );

    // a bad file value is rejected unless a flag overrides it
    std::fs::write(&cfg, "key = 7\n").unwrap();
    let out = dir.path().join("k.png");
    let mut args: Vec<&str> = vec!["fuse", "--config", as_str(&cfg), "-o", as_str(&out)];
    args.extend(inputs.iter().map(|p| as_str(p)));
    assert_eq!(mefuse(&args).status.code(), Some(1));
    args.extend(["--key", "0.2"]);
    let res = mefuse(&args);
    assert!(res.status.success(), "{}", stderr(&res));
}

#[test]
fn bad_backend_and_thread_settings_fail() {
    let dir = TempDir::new().unwrap();
    let inputs = write_stack(dir.path(), "shot", &small_stack());
    let out = dir.path().join("o.png");
    let mut args: Vec<&str> = vec!["fuse", "--backend", "laplace", "-o", as_str(&out)];
    args.extend(inputs.iter().map(|p| as_str(p)));
    assert_eq!(mefuse(&args).status.code(), Some(1));

    let mut args: Vec<&str> = vec!["fuse", "-o", as_str(&out)];
    args.extend(inputs.iter().map(|p| as_str(p)));
    let res = Command::new(env!("CARGO_BIN_EXE_mefuse"))
        .args(&args)
        .env("MEFUSE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(1));
    assert!(stderr(&res).contains("MEFUSE_THREADS"));
}

#[test]
fn thread_cap_does_not_change_output() {
    let dir = TempDir::new().unwrap();
    let inputs = write_stack(dir.path(), "shot", &small_stack());
    let run = |threads: &str, name: &str| {
        let out = dir.path().join(name);
        let mut args: Vec<&str> = vec!["fuse", "-o", as_str(&out)];
        args.extend(inputs.iter().map(|p| as_str(p)));
        let res = Command::new(env!("CARGO_BIN_EXE_mefuse"))
            .args(&args)
            .env("MEFUSE_THREADS", threads)
            .output()
            .unwrap();
        assert!(res.status.success(), "{}", stderr(&res));
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("1", "one.png"), run("3", "three.png"));
}

#[test]
fn simulate1_writes_images_and_one_row_per_metric() {
    let dir = TempDir::new().unwrap();
    let hdr = small_hdr(dir.path(), "crop");
    let out_dir = dir.path().join("out");
    let report = dir.path().join("report.csv");
    let scores = dir.path().join("scores.csv");
    let args = [
        "simulate1",
        as_str(&hdr),
        "--evs",
        "-1,0,1",
        "--dump-stacks",
        "--out-dir",
        as_str(&out_dir),
        "--report",
        as_str(&report),
        "--scores",
        as_str(&scores),
    ];
    let res = mefuse(&args);
    assert!(res.status.success(), "{}", stderr(&res));

    for name in [
        "crop_mertens_original.png",
        "crop_mertens_proposed.png",
        "crop_ev-1.png",
        "crop_ev0.png",
        "crop_ev+1.png",
    ] {
        assert!(out_dir.join(name).exists(), "missing {name}");
    }
    let rows = read_table(&report);
    assert_eq!(rows.len(), 2);
    assert_eq!(row(&rows, "entropy")[0], "crop");
    assert_eq!(row(&rows, "naturalness")[2], "mertens");
    for r in &rows {
        for v in &r[3..] {
            assert_eq!(v.split('.').nth(1).map(str::len), Some(6), "{v}");
        }
    }
    let score_text = std::fs::read_to_string(&scores).unwrap();
    assert!(score_text.starts_with("image_id,method_id,entropy_bits,naturalness\n"));
    assert_eq!(score_text.lines().count(), 4);

    // rerun: byte-identical report
    let first = std::fs::read(&report).unwrap();
    assert!(mefuse(&args).status.success());
    assert_eq!(std::fs::read(&report).unwrap(), first);
}

#[test]
fn simulate1_continues_past_bad_files() {
    let dir = TempDir::new().unwrap();
    let hdr = small_hdr(dir.path(), "good");
    let bad = dir.path().join("bad.hdr");
    std::fs::write(&bad, b"not an hdr").unwrap();
    let report = dir.path().join("r.csv");
    let out_dir = dir.path().join("o");
    let res = mefuse(&[
        "simulate1",
        as_str(&bad),
        as_str(&hdr),
        "--out-dir",
        as_str(&out_dir),
        "--report",
        as_str(&report),
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    assert!(stderr(&res).contains("bad.hdr"));
    let rows = read_table(&report);
    assert!(rows.iter().all(|r| r[0] == "good"));
    assert_eq!(rows.len(), 2);

    let res = mefuse(&["simulate1", as_str(&bad), "--out-dir", as_str(&out_dir)]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn simulate1_dark_scene_gains_entropy() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("r.csv");
    let hdr = bundled("desk_monitor");
    let res = mefuse(&[
        "simulate1",
        as_str(&hdr),
        "--out-dir",
        as_str(dir.path()),
        "--report",
        as_str(&report),
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    let rows = read_table(&report);
    let e = row(&rows, "entropy");
    assert!(num(&e[5]) >= num(&e[4]), "{e:?}");
}

#[test]
fn simulate2_dark_stack_gains_naturalness() {
    let dir = TempDir::new().unwrap();
    let hdr = load_rgbe(bundled("desk_lamp")).unwrap();
    let stack = synth_exposures(&hdr, &[-4.0, -3.0, -2.0], 0.18).unwrap();
    let stack_dir = dir.path().join("dark_room");
    std::fs::create_dir(&stack_dir).unwrap();
    write_stack(&stack_dir, "img", &stack);
    std::fs::write(stack_dir.join("notes.txt"), "ignored").unwrap();

    let report = dir.path().join("r.csv");
    let out_dir = dir.path().join("out");
    let res = mefuse(&[
        "simulate2",
        as_str(&stack_dir),
        "--out-dir",
        as_str(&out_dir),
        "--report",
        as_str(&report),
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    let rows = read_table(&report);
    assert_eq!(rows.len(), 2);
    let n = row(&rows, "naturalness");
    assert_eq!(n[0], "dark_room");
    assert!(num(&n[5]) > num(&n[4]), "{n:?}");
    assert!(out_dir.join("dark_room_mertens_proposed.png").exists());
}

#[test]
fn simulate2_single_image_stack() {
    let dir = TempDir::new().unwrap();
    let stack = small_stack();
    let only = write_stack(dir.path(), "solo", &stack).remove(1);
    let report = dir.path().join("r.csv");
    let res = mefuse(&[
        "simulate2",
        as_str(&only),
        "--out-dir",
        as_str(dir.path()),
        "--report",
        as_str(&report),
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    let rows = read_table(&report);
    assert_eq!(rows.len(), 2);
    assert_eq!(row(&rows, "entropy")[0], "solo_1");
    let fused = mefuse::hdrio::load_ldr(dir.path().join("solo_1_mertens_proposed.png")).unwrap();
    assert_eq!(fused.dimensions(), (64, 48));
}

#[test]
fn simulate2_mixed_sizes_fail() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.png");
    let b = dir.path().join("b.png");
    save_ldr(&a, &RgbImage::filled(20, 20, [0.2; 3]).unwrap()).unwrap();
    save_ldr(&b, &RgbImage::filled(24, 20, [0.6; 3]).unwrap()).unwrap();
    let list = format!("{},{}", as_str(&a), as_str(&b));
    let res = mefuse(&["simulate2", &list, "--out-dir", as_str(dir.path())]);
    assert_eq!(res.status.code(), Some(1));
    assert!(
        stderr(&res).contains("dimension mismatch"),
        "{}",
        stderr(&res)
    );
}
