//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;

use polygray::nodesolver::{bin_stats, init_nodes, solve_nodes, NodeSolverConfig};
use polygray::pipeline::{build_lut, build_transform, enhance, equidistant_targets, EnhanceConfig};
use polygray::{
    read_pgm, solve_coefficients, write_pgm, GrayImage, NodeSet, PgmFormat, TargetValues,
};
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn coefficients(nodes: &[f64]) -> Vec<f64> {
    let targets = equidistant_targets(nodes.len(), 255.0);
    solve_coefficients(NodeSet::new(nodes.to_vec()).unwrap(), targets, 255.0)
        .unwrap()
        .coeffs()
        .to_vec()
}

/// Printed-coefficient reproduction, with the tolerance confirmed against the
/// spread caused by rounding the interior nodes to one decimal.
fn criterion_1() -> Outcome {
    let cases: [(&str, &[f64], &[f64], f64); 4] = [
        (
            "landsat n=3",
            &[15.0, 53.9, 134.0],
            &[2.711, -0.844, 0.276],
            0.01,
        ),
        (
            "cells n=3",
            &[197.0, 244.7, 254.0],
            &[3.573, 5.518, -4.618],
            0.01,
        ),
        (
            "landsat n=4",
            &[15.0, 47.4, 61.4, 134.0],
            &[2.385, 1.712, -2.44, 0.486],
            0.02,
        ),
        (
            "cells n=4",
            &[197.0, 243.3, 246.2, 254.0],
            &[3.156, 13.502, -8.972, -3.212],
            0.3,
        ),
    ];
    let mut notes = Vec::new();
    for (name, nodes, printed, tol) in cases {
        let solved = coefficients(nodes);
        let worst = solved
            .iter()
            .zip(printed)
            .map(|(a, p)| (a - p).abs())
            .fold(0.0, f64::max);
        ensure!(
            worst <= tol,
            "{name}: solved {solved:?} vs printed {printed:?}, max dev {worst:.4} > {tol}"
        );

        // envelope over every +-0.05 perturbation of the interior nodes
        let interior = nodes.len() - 2;
        let mut lo = vec![f64::INFINITY; nodes.len()];
        let mut hi = vec![f64::NEG_INFINITY; nodes.len()];
        for combo in 0..3usize.pow(interior as u32) {
            let mut perturbed = nodes.to_vec();
            let mut c = combo;
            for v in perturbed.iter_mut().skip(1).take(interior) {
                *v += [-0.05, 0.0, 0.05][c % 3];
                c /= 3;
            }
            for (k, a) in coefficients(&perturbed).into_iter().enumerate() {
                lo[k] = lo[k].min(a);
                hi[k] = hi[k].max(a);
            }
        }
        // printed values carry three decimals
        for (k, p) in printed.iter().enumerate() {
            ensure!(
                lo[k] - 5e-4 <= *p && *p <= hi[k] + 5e-4,
                "{name}: printed a[{k}] = {p} outside rounding envelope [{}, {}]",
                lo[k],
                hi[k]
            );
        }
        let spread = solved
            .iter()
            .enumerate()
            .map(|(k, a)| (a - lo[k]).abs().max((hi[k] - a).abs()))
            .fold(0.0, f64::max);
        notes.push(format!(
            "{name}: dev {worst:.4}, rounding spread {spread:.3}"
        ));
    }
    Ok(notes.join("; "))
}

fn criterion_2() -> Outcome {
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed);
    let m = 255.0;
    let mut worst_residual: f64 = 0.0;
    let mut worst_sum: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.gen_range(2..=10);
        let mut nodes: Vec<f64> = Vec::with_capacity(n);
        let mut v = rng.gen_range(0.0..m / 2.0);
        for _ in 0..n {
            nodes.push(v);
            v += rng.gen_range(0.5..m / n as f64);
        }
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..=m)).collect();
        let poly = solve_coefficients(
            NodeSet::new(nodes.clone()).unwrap(),
            TargetValues::new(values.clone()).unwrap(),
            m,
        )
        .unwrap();
        for (v, f) in nodes.iter().zip(&values) {
            let r = (poly.evaluate(*v) - f).abs();
            worst_residual = worst_residual.max(r);
            ensure!(r <= 1e-9 * m, "residual {r} at node {v}");
        }
        let expected = (values[n - 1] + values[0]) / (nodes[n - 1] - nodes[0]);
        let sum: f64 = poly.coeffs().iter().sum();
        let rel = (sum - expected).abs() / expected.abs().max(f64::MIN_POSITIVE);
        if expected != 0.0 {
            worst_sum = worst_sum.max(rel);
            ensure!(rel <= 1e-9, "slope-sum relative error {rel}");
        } else {
            ensure!(sum.abs() <= 1e-12, "slope-sum {sum} for zero end targets");
        }
    }
    Ok(format!(
        "max residual {worst_residual:.2e}, max slope-sum rel err {worst_sum:.2e}"
    ))
}

fn criterion_3() -> Outcome {
    let image = common::exact_uniform(256, 256);
    let mut notes = Vec::new();
    for n in [3, 4, 5] {
        let res = solve_nodes(&image, &NodeSolverConfig::with_n(n)).map_err(|e| e.to_string())?;
        ensure!(res.converged, "n={n} did not converge");
        ensure!(
            res.iterations <= 10,
            "n={n} took {} iterations",
            res.iterations
        );
        let mut worst: f64 = 0.0;
        for (i, v) in res.nodes.as_slice().iter().enumerate() {
            let ideal = i as f64 / (n - 1) as f64 * 255.0;
            worst = worst.max((v - ideal).abs());
        }
        ensure!(
            worst <= 1.0,
            "n={n}: nodes {:?} off equidistant by {worst}",
            res.nodes
        );
        notes.push(format!("n={n}: {} it, max off {worst:.3}", res.iterations));
    }
    Ok(notes.join("; "))
}

fn corpus_runs() -> Vec<(&'static str, GrayImage, usize)> {
    let mut runs = Vec::new();
    for (name, image) in common::corpus(128, 96) {
        let ns: &[usize] = if name == "two-level" {
            &[2, 3]
        } else {
            &[2, 3, 4, 5, 6]
        };
        for &n in ns {
            runs.push((name, image.clone(), n));
        }
    }
    runs
}

fn criterion_4() -> Outcome {
    let eps = 0.5;
    let mut max_iter = 0;
    let mut worst: f64 = 0.0;
    let runs = corpus_runs();
    for (name, image, n) in &runs {
        let cfg = NodeSolverConfig {
            epsilon: eps,
            max_iterations: 50,
            ..NodeSolverConfig::with_n(*n)
        };
        let res = solve_nodes(image, &cfg).map_err(|e| format!("{name} n={n}: {e}"))?;
        ensure!(
            res.converged,
            "{name} n={n}: no convergence in 50 iterations"
        );
        max_iter = max_iter.max(res.iterations);
        let v = res.nodes.as_slice();
        for i in 1..v.len() - 1 {
            let (count, sum) = common::naive_bin(image, v[i - 1], v[i + 1]);
            ensure!(count > 0, "{name} n={n}: empty bin {i} at the fixed point");
            let mean = sum as f64 / count as f64;
            let gap = (v[i] - mean).abs();
            worst = worst.max(gap);
            ensure!(
                gap < eps,
                "{name} n={n}: node {i} = {} vs bin mean {mean}",
                v[i]
            );
        }
    }
    Ok(format!(
        "{} runs, max iterations {max_iter}, max |v - mean| {worst:.3}",
        runs.len()
    ))
}

fn criterion_5() -> Outcome {
    let mut images: Vec<GrayImage> = common::corpus(16, 32)
        .into_iter()
        .map(|(_, img)| img)
        .collect();
    let mut rng = rand::rngs::StdRng::seed_from_u64(5);
    for _ in 0..50 {
        let (w, h) = (rng.gen_range(1..=40), rng.gen_range(1..=25));
        let max = if rng.gen_bool(0.5) { 255 } else { 15 };
        images.push(GrayImage::from_fn(w, h, max, |_, _| rng.gen_range(0..=max)).unwrap());
    }
    let mut checks = 0;
    for image in &images {
        ensure!(image.pixel_count() <= 1000, "test image too large");
        let (lo, hi) = polygray::nodesolver::min_max_levels(image);
        if lo == hi {
            continue;
        }
        let mut node_sets: Vec<NodeSet> = (3..=6).map(|n| init_nodes(lo, hi, n).unwrap()).collect();
        if let Ok(res) = solve_nodes(image, &NodeSolverConfig::with_n(4)) {
            node_sets.extend(res.trace.iter().map(|t| NodeSet::new(t.clone()).unwrap()));
        }
        for nodes in &node_sets {
            let v = nodes.as_slice();
            for i in 1..v.len() - 1 {
                let fast = bin_stats(image, nodes, i).unwrap();
                let naive = common::naive_bin(image, v[i - 1], v[i + 1]);
                ensure!(
                    (fast.pixel_count, fast.level_sum) == naive,
                    "bin {i} of {v:?}: {fast:?} vs {naive:?}"
                );
                checks += 1;
            }
        }
    }
    Ok(format!("{} images, {checks} bins identical", images.len()))
}

fn criterion_6() -> Outcome {
    let runs = corpus_runs();
    for (name, image, n) in &runs {
        let (out, report) =
            enhance(image, &EnhanceConfig::with_n(*n)).map_err(|e| format!("{name} n={n}: {e}"))?;
        ensure!(
            (out.width(), out.height()) == (image.width(), image.height()),
            "{name}: shape changed"
        );
        ensure!(
            out.levels().iter().all(|&l| l <= 255),
            "{name}: level above 255"
        );
        let (lo, hi) = polygray::nodesolver::min_max_levels(image);
        for (src, dst) in image.levels().iter().zip(out.levels()) {
            if f64::from(*src) == lo {
                ensure!(*dst == 0, "{name} n={n}: min level mapped to {dst}");
            }
            if f64::from(*src) == hi {
                ensure!(*dst == 255, "{name} n={n}: max level mapped to {dst}");
            }
        }
        let lut = build_lut(&report.function, image.max_level());
        ensure!(
            lut.entries().windows(2).all(|w| w[0] <= w[1]),
            "{name} n={n}: LUT not monotone"
        );
        let (before, after) = (image.histogram(), out.histogram());
        ensure!(
            before.counts().iter().sum::<u64>() == after.counts().iter().sum::<u64>()
                && after.total() == image.pixel_count() as u64,
            "{name}: histogram mass changed"
        );
    }
    Ok(format!("{} runs", runs.len()))
}

fn criterion_7() -> Outcome {
    let uniform = common::exact_uniform(256, 256);
    let mut worst = 0;
    for n in [3, 4, 5, 6] {
        let (out, _) = enhance(&uniform, &EnhanceConfig::with_n(n)).map_err(|e| e.to_string())?;
        let d = uniform
            .levels()
            .iter()
            .zip(out.levels())
            .map(|(a, b)| a.abs_diff(*b))
            .max()
            .unwrap();
        ensure!(d <= 1, "n={n}: a pixel moved by {d}");
        worst = worst.max(d);
    }
    let ramp = GrayImage::from_fn(256, 8, 255, |x, _| x as u16).unwrap();
    for image in [&uniform, &ramp] {
        let (out, _) = enhance(image, &EnhanceConfig::with_n(2)).map_err(|e| e.to_string())?;
        ensure!(&out == image, "n=2 changed a full-range image");
        let (f, _) =
            build_transform(image, &EnhanceConfig::with_n(2)).map_err(|e| e.to_string())?;
        ensure!(
            f.coeffs() == [1.0, 0.0],
            "n=2 coefficients {:?}",
            f.coeffs()
        );
    }
    Ok(format!(
        "max change {worst} level(s) for n=3..6; n=2 bit-exact"
    ))
}

fn criterion_8() -> Outcome {
    let mut rng = rand::rngs::StdRng::seed_from_u64(8);
    let mut trips = 0;
    for maxval in [1u16, 255, 65535] {
        for _ in 0..10 {
            let (w, h) = (rng.gen_range(1..=30), rng.gen_range(1..=30));
            let image = GrayImage::from_fn(w, h, maxval, |_, _| rng.gen_range(0..=maxval)).unwrap();
            for format in [PgmFormat::Ascii, PgmFormat::Binary] {
                let bytes = write_pgm(&image, format);
                ensure!(
                    read_pgm(&bytes).map_err(|e| e.to_string())? == image,
                    "round trip failed for maxval {maxval} {format:?}"
                );
                ensure!(
                    write_pgm(&read_pgm(&bytes).unwrap(), format) == bytes,
                    "re-encode differs"
                );
                trips += 1;
            }
        }
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("in.pgm");
    std::fs::write(
        &input,
        write_pgm(&common::dark_skewed(100, 80), PgmFormat::Binary),
    )
    .unwrap();
    let outputs = |tag: &str| -> Result<Vec<Vec<u8>>, String> {
        let p = |name: &str| dir.path().join(format!("{tag}-{name}"));
        let status = Command::new(env!("CARGO_BIN_EXE_polygray"))
            .arg("enhance")
            .arg(&input)
            .arg(p("out.pgm"))
            .args(["--n", "4", "--report"])
            .arg(p("report.json"))
            .arg("--function-csv")
            .arg(p("f.csv"))
            .arg("--histogram-csv")
            .arg(p("h.csv"))
            .status()
            .map_err(|e| e.to_string())?;
        ensure!(status.success(), "enhance exited with {status}");
        let mut files: Vec<Vec<u8>> = ["out.pgm", "report.json", "f.csv", "h.csv"]
            .iter()
            .map(|f| std::fs::read(p(f)).unwrap())
            .collect();
        for sub in [
            &["nodes"][..],
            &["function", "--samples", "16"],
            &["histogram"],
        ] {
            let out = Command::new(env!("CARGO_BIN_EXE_polygray"))
                .args(sub)
                .arg(&input)
                .output()
                .map_err(|e| e.to_string())?;
            ensure!(out.status.success(), "{sub:?} failed");
            files.push(out.stdout);
        }
        Ok(files)
    };
    let first = outputs("a")?;
    let second = outputs("b")?;
    ensure!(first == second, "repeated CLI invocations differ");
    ensure!(
        Path::new(env!("CARGO_BIN_EXE_polygray")).exists(),
        "binary missing"
    );
    Ok(format!(
        "{trips} PGM round trips; {} CLI artifacts byte-identical",
        first.len()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 printed-coefficient reproduction", criterion_1),
        ("2 interpolation property suite", criterion_2),
        ("3 uniform-distribution equidistance", criterion_3),
        ("4 fixed-point verification", criterion_4),
        ("5 brute-force bin equivalence", criterion_5),
        ("6 end-to-end invariants", criterion_6),
        ("7 identity cases", criterion_7),
        ("8 I/O round trip and CLI determinism", criterion_8),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
