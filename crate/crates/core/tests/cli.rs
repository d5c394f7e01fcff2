use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use convexdyn::cli::config_hash;
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_convexdyn"));
    c.env_remove("CONVEXDYN_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad report ({e}): {}\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn write_pgm(path: &Path, w: usize, h: usize, f: impl Fn(usize, usize) -> u8) {
    let mut bytes = format!("P5\n# test image\n{w} {h}\n255\n").into_bytes();
    for i in 0..h {
        for j in 0..w {
            bytes.push(f(i, j));
        }
    }
    fs::write(path, bytes).unwrap();
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sturmian_third_and_report_shape() {
    let out = run(&["sturmian", "--gamma", "0.333333", "--n", "9"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["metrics"]["bits"], "001001001");
    assert_eq!(r["tool"], "convexdyn");
    assert_eq!(r["command"], "sturmian");
    assert_eq!(r["pass"], true);
    assert_eq!(r["config_hash"].as_str().unwrap(), config_hash(&r["config"]));
    assert!(r.get("wall_time").is_none());
    for a in r["assertions"].as_array().unwrap() {
        for m in a["metrics"].as_array().unwrap() {
            assert!(r["metrics"].get(m.as_str().unwrap()).is_some(), "{m} not reported");
        }
    }
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["sturmian", "--bogus"]).status.code(), Some(2));
    assert_eq!(
        run(&["halftone", "--in", "/no/such.pgm", "--out", "x.pgm"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["region", "--polytope", "nonesuch", "--t", "1"]).status.code(),
        Some(2)
    );
    // Q_t is not invariant below t = 1/2 on the square
    let out = run(&["region", "--polytope", "square", "--t", "0.3"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["pass"], false);
    assert_eq!(
        run(&["region", "--polytope", "square", "--t", "0.6"]).status.code(),
        Some(0)
    );
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn seed_env_overrides_flag() {
    let out = bin()
        .env("CONVEXDYN_SEED", "5")
        .args(["--seed", "1", "schedule", "--steps", "10"])
        .output()
        .unwrap();
    assert_eq!(report(&out)["seed"], 5);
    let out = run(&["--seed", "1", "schedule", "--steps", "10"]);
    assert_eq!(report(&out)["seed"], 1);
    let bad = bin().env("CONVEXDYN_SEED", "x").args(["schedule"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn seeded_schedule_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (
        dir.path().join("a.csv"),
        dir.path().join("b.csv"),
        dir.path().join("c.csv"),
    );
    for (seed, f) in [("3", &a), ("3", &b), ("4", &c)] {
        let out = run(&[
            "--seed",
            seed,
            "schedule",
            "--polytope",
            "cube(3)",
            "--steps",
            "500",
            "--out",
            s(f),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let (ta, tb, tc) = (fs::read(&a).unwrap(), fs::read(&b).unwrap(), fs::read(&c).unwrap());
    assert_eq!(ta, tb);
    assert_ne!(ta, tc);
    let text = String::from_utf8(ta).unwrap();
    assert!(text.starts_with("k,vid,eps_norm,running_sup\n"));
    assert_eq!(text.lines().count(), 501);
}

#[test]
fn schedule_synthetic_streams() {
    let out = run(&[
        "schedule",
        "--polytope",
        "simplex(3)",
        "--synthetic",
        "barycenter",
        "--steps",
        "400",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["metrics"]["period"], 4);
    // each vertex a quarter of the time, up to the start-up transient
    for c in r["metrics"]["assignment_counts"].as_array().unwrap() {
        assert!(c.as_i64().unwrap().abs_diff(100) <= 1, "{c}");
    }

    let out = run(&[
        "schedule",
        "--polytope",
        "square",
        "--synthetic",
        "vertices",
        "--steps",
        "12",
    ]);
    let r = report(&out);
    assert_eq!(r["metrics"]["sup_error"], 0.0);
    assert_eq!(r["pass"], true);
}

#[test]
fn schedule_reads_demands_and_checks_membership() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("d.csv");
    fs::write(&d, "g0,g1\n0.5,0.5\n# comment\n0.25,0.75\n1,0\n").unwrap();
    let tr = dir.path().join("t.csv");
    let out = run(&[
        "schedule",
        "--polytope",
        "square",
        "--demands",
        s(&d),
        "--trace",
        s(&tr),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["metrics"]["steps"], 3);
    let trace = fs::read_to_string(&tr).unwrap();
    assert_eq!(
        trace.lines().next().unwrap(),
        "k,gamma_0,gamma_1,vid,eps_0,eps_1,eps_norm"
    );
    assert_eq!(trace.lines().count(), 4);

    fs::write(&d, "1.5,0.5\n").unwrap();
    let strict = run(&["--strict", "schedule", "--polytope", "square", "--demands", s(&d)]);
    assert_eq!(strict.status.code(), Some(2));
    let lax = run(&["schedule", "--polytope", "square", "--demands", s(&d)]);
    assert_eq!(lax.status.code(), Some(0));

    fs::write(&d, "0.5\n").unwrap();
    assert_eq!(
        run(&["schedule", "--polytope", "square", "--demands", s(&d)])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn halftone_pgm_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (input, out) = (dir.path().join("in.pgm"), dir.path().join("out.pgm"));
    write_pgm(&input, 64, 48, |i, j| ((i * 5 + j * 3) % 256) as u8);
    let o = run(&["halftone", "--in", s(&input), "--scheme", "simple", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&o);
    assert_eq!(r["metrics"]["width"], 64);
    let bytes = fs::read(&out).unwrap();
    assert!(bytes.starts_with(b"P5\n64 48\n255\n"));
    let body = &bytes[bytes.len() - 64 * 48..];
    assert!(body.iter().all(|&b| b == 0 || b == 255));

    // a one-tap scheme file identical to simple diffusion
    let sch = dir.path().join("left.txt");
    fs::write(&sch, "# left neighbor\n0 -1 1.0\n").unwrap();
    let out2 = dir.path().join("out2.pgm");
    let o = run(&["halftone", "--in", s(&input), "--scheme", s(&sch), "--out", s(&out2)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read(&out).unwrap(), fs::read(&out2).unwrap());
}

#[test]
fn halftone_rejects_bad_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.pgm");
    fs::write(&bad, b"P2\n2 2\n255\n0 0 0 0\n").unwrap();
    let out = dir.path().join("o.pgm");
    assert_eq!(
        run(&["halftone", "--in", s(&bad), "--out", s(&out)]).status.code(),
        Some(2)
    );
    let input = dir.path().join("in.pgm");
    write_pgm(&input, 8, 8, |_, _| 100);
    let sch = dir.path().join("bad.txt");
    fs::write(&sch, "0 1 1.0\n").unwrap();
    let code = run(&["halftone", "--in", s(&input), "--scheme", s(&sch), "--out", s(&out)])
        .status
        .code();
    assert_eq!(code, Some(2));
    let code = run(&["halftone", "--in", s(&input), "--polytope", "square", "--out", s(&out)])
        .status
        .code();
    assert_eq!(code, Some(2));
}

#[test]
fn halftone_ppm_tristimulus() {
    let dir = tempfile::tempdir().unwrap();
    let (input, out) = (dir.path().join("in.ppm"), dir.path().join("out.ppm"));
    let mut bytes = b"P6\n16 16\n255\n".to_vec();
    for k in 0..16 * 16 * 3 {
        bytes.push((k * 37 % 256) as u8);
    }
    fs::write(&input, bytes).unwrap();
    let o = run(&[
        "halftone",
        "--in",
        s(&input),
        "--polytope",
        "tristimulus",
        "--scheme",
        "fs3",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let img = fs::read(&out).unwrap();
    assert!(img.starts_with(b"P6\n16 16\n255\n"));
    let body = &img[img.len() - 16 * 16 * 3..];
    assert!(body.iter().all(|&b| b == 0 || b == 255));
}

#[test]
fn halftone_scaling_report() {
    let dir = tempfile::tempdir().unwrap();
    let (input, out) = (dir.path().join("in.pgm"), dir.path().join("out.pgm"));
    write_pgm(&input, 128, 128, |i, j| ((i * 131 + j * 71 + i * j) % 256) as u8);
    let o = run(&[
        "halftone",
        "--in",
        s(&input),
        "--scheme",
        "fs3",
        "--out",
        s(&out),
        "--scaling",
        "8,16,32,64",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&o);
    let sc = &r["metrics"]["scaling"];
    assert_eq!(sc["points"].as_array().unwrap().len(), 4);
    assert!(sc["slope"].as_f64().unwrap() < 1.2);
}

#[test]
fn region_export_format() {
    let dir = tempfile::tempdir().unwrap();
    let e = dir.path().join("q.txt");
    let o = run(&["region", "--polytope", "square", "--q-infinity", "--export", s(&e)]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&e).unwrap();
    let mut arcs = 0;
    for line in text.lines() {
        let f: Vec<&str> = line.split(' ').collect();
        match f[0] {
            "arc" => {
                assert_eq!(f.len(), 6);
                arcs += 1;
            }
            "seg" => assert_eq!(f.len(), 5),
            other => panic!("unexpected element {other}"),
        }
        assert!(f[1..].iter().all(|x| x.parse::<f64>().is_ok()));
    }
    assert_eq!(arcs, 8);
    let r = report(&o);
    let v = &r["metrics"]["verdicts"][0];
    assert!(v["rho"].is_number() && v["pass"] == true && v["margin"].is_number() && v["samples"].is_number());

    let e2 = dir.path().join("p.txt");
    let o = run(&["region", "--polytope", "triangle", "--t", "1", "--export", s(&e2)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read_to_string(&e2).unwrap().lines().count(), 3);
}

#[test]
fn region_min_t_on_a_polygon_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("rect.txt");
    fs::write(&f, "# a 2 x 1 rectangle\n0 0\n2 0\n2 1\n0 1\n").unwrap();
    let o = run(&[
        "region",
        "--polytope",
        s(&f),
        "--find-min-t",
        "--boundary",
        "1000",
        "--interior",
        "100",
        "--gammas",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let r = report(&o);
    let t = r["metrics"]["t"].as_f64().unwrap();
    assert!(t > 0.0 && t < 2.0);
    assert!(r["metrics"]["below"]["witness"].is_object());
}

#[test]
fn region_absorption() {
    let o = run(&[
        "region",
        "--polytope",
        "square",
        "--t",
        "0.6",
        "--absorb-from",
        "1000,-1000",
        "--stay-steps",
        "1000",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&o);
    assert!(r["metrics"]["absorption_0"]["entry_step"].as_u64().unwrap() > 0);
}

#[test]
fn counterexample_table() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("cx.csv");
    let o = run(&[
        "counterexample",
        "--sweep",
        "0:1:0.5",
        "--side-sweep",
        "0,0.1,0.2",
        "--out",
        s(&f),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&f).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 3);
    assert!(text.starts_with("hex_shift,side_shift,overshoot_a,overshoot_b,failure_a,failure_b"));
    assert_eq!(report(&o)["metrics"]["passing"], 0);
    assert_eq!(run(&["counterexample", "--cut", "0.7"]).status.code(), Some(2));
}

#[test]
fn absorb_and_pursuit() {
    let o = run(&["absorb", "--gamma", "0.5", "--x0", "-3,100"]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&o);
    assert_eq!(r["metrics"]["records"][0]["entry"], 6);

    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("p.csv");
    let o = run(&["pursuit", "--polytope", "square", "--steps", "2000", "--out", s(&f)]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&f).unwrap();
    assert_eq!(text.lines().next().unwrap(), "n,p_0,p_1,q_0,q_1,distance,eps_norm");
    assert_eq!(text.lines().count(), 2001);
    let o = run(&["pursuit", "--input", "constant", "--gamma", "0.3", "--steps", "500"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn report_file_and_timings() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("r.json");
    let o = run(&[
        "-q",
        "--report",
        s(&f),
        "--timings",
        "sturmian",
        "--gamma",
        "0.5",
        "--n",
        "20",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let r: Value = serde_json::from_str(&fs::read_to_string(&f).unwrap()).unwrap();
    assert!(r["wall_time"].is_number());
}
