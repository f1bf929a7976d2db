//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test -p glarekit-cli --test acceptance`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use glarekit::calib::{fit_joint_gsf, CalibDataset, CalibScene, FitOptions};
use glarekit::deglare::{deglare, detect_saturation, wiener_deconvolve, DeglareOptions, DeglareReport, WienerConfig};
use glarekit::encode::{encode, quantize, TransferFunction};
use glarekit::hdrmerge::merge_hdr;
use glarekit::metrics::{
    average_precision, mean_ap, miou, mota_motp, rmse_depth, rmse_point_pairs, rmse_points, BoundingBox, DetectionSet,
    LanePointSet, TrackEntry, TrackFrame,
};
use glarekit::stats::{log_rmse, relative_rmse};
use glarekit::synth::{degrade, make_exposure_stack, make_scene, GaussianStream, SceneSpec};
use glarekit::{eval_gsf, rasterize_kernel, simulate_glare, GsfParams, RadianceMap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---------------------------------------------------------------- 1

fn spatial_convolution(img: &[f64], w: usize, h: usize, p: &GsfParams) -> Vec<f64> {
    let (wi, hi) = (w as isize, h as isize);
    let mut taps = vec![0.0; 4 * w * h];
    for dy in -hi..hi {
        for dx in -wi..wi {
            taps[((dy + hi) * 2 * wi + dx + wi) as usize] = eval_gsf(p, ((dx * dx + dy * dy) as f64).sqrt());
        }
    }
    let total: f64 = taps.iter().sum();
    let mut out = vec![0.0; w * h];
    for y in 0..hi {
        for x in 0..wi {
            let mut acc = 0.0;
            for sy in 0..hi {
                for sx in 0..wi {
                    acc += img[(sy * wi + sx) as usize] * taps[((y - sy + hi) * 2 * wi + x - sx + wi) as usize];
                }
            }
            out[(y * wi + x) as usize] = acc / total;
        }
    }
    out
}

fn fourier_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let params = [GsfParams::default(), GsfParams::new(0.3, 0.2, 0.05, 1.7), GsfParams::new(0.95, 0.01, 2.0, 0.5)];
    let mut worst = 0.0f64;
    let mut cases = 0;
    for w in 8..=16 {
        for h in 8..=16 {
            for p in &params {
                let data: Vec<f64> = (0..w * h).map(|_| rng.random::<f64>()).collect();
                let img = RadianceMap::new(w, h, 1, data.clone()).map_err(|e| e.to_string())?;
                let k = rasterize_kernel(p, w, h).map_err(|e| e.to_string())?;
                let fast = simulate_glare(&img, &k).map_err(|e| e.to_string())?;
                let slow = spatial_convolution(&data, w, h, p);
                for (a, b) in fast.data().iter().zip(&slow) {
                    worst = worst.max((a - b).abs());
                }
                cases += 1;
            }
        }
    }
    check(worst < 1e-8, format!("{cases} random images, max abs diff {worst:.2e} (limit 1e-8)"))
}

// ---------------------------------------------------------------- 2

fn wiener_round_trip() -> Outcome {
    let n = 64;
    let p = GsfParams::default().canonical(n, n);
    let k = rasterize_kernel(&p, n, n).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for seed in 0..10 {
        let x = make_scene(&SceneSpec::tunnel(n, n, seed)).map_err(|e| e.to_string())?;
        let y = simulate_glare(&x, &k).map_err(|e| e.to_string())?;
        let r = wiener_deconvolve(&y, &k, &WienerConfig { nsr: 1e-12 }).map_err(|e| e.to_string())?;
        worst = worst.max(relative_rmse(r.data(), x.data()));
    }
    check(worst < 1e-3, format!("10 tunnel scenes 64x64, worst relative RMSE {worst:.2e} (limit 1e-3)"))
}

// ---------------------------------------------------------------- 3

/// Point-source rig image through `p`, with optional multiplicative
/// log-normal noise of relative size `noise`.
fn calib_scene(
    id: &str,
    p: &GsfParams,
    n: usize,
    intensity: f64,
    noise: f64,
    seed: u64,
) -> glarekit::Result<CalibScene> {
    let l_in = make_scene(&SceneSpec::rig(n, n, 2.0, intensity))?;
    let glared = simulate_glare(&l_in, &rasterize_kernel(p, n, n)?)?;
    let mut g = GaussianStream::new(seed);
    let data = glared.data().iter().map(|v| v * (noise * g.sample()).exp()).collect();
    CalibScene::new(id, l_in, RadianceMap::new(n, n, 1, data)?, 1.0)
}

fn max_rel_error(a: &GsfParams, b: &GsfParams) -> f64 {
    [(a.p1, b.p1), (a.p2, b.p2), (a.p3, b.p3), (a.p4, b.p4)]
        .iter()
        .map(|(x, y)| ((x - y) / y).abs())
        .fold(0.0, f64::max)
}

fn calibration_recovery() -> Outcome {
    let n = 128;
    let truth = GsfParams::new(0.9, 0.004, 0.3, 0.9).canonical(n, n);
    let init = GsfParams::new(0.5, 0.05, 1.0, 1.5);
    let opts = FitOptions::default();
    let run = || -> glarekit::Result<(f64, f64, f64)> {
        let single = CalibDataset::new(vec![calib_scene("cam0", &truth, n, 100.0, 0.0, 0)?], 0.0)?;
        let fit1 = fit_joint_gsf(&single, &init, &opts)?;
        let joint = CalibDataset::new(
            vec![
                calib_scene("cam0", &truth, n, 100.0, 0.01, 11)?,
                calib_scene("cam1", &truth, n, 50.0, 0.01, 12)?,
                calib_scene("cam2", &truth, n, 500.0, 0.01, 13)?,
            ],
            0.0,
        )?;
        let fit3 = fit_joint_gsf(&joint, &init, &opts)?;
        let res: Vec<f64> = fit3.per_scene_residual.iter().map(|r| r.residual).collect();
        let (lo, hi) = res.iter().fold((f64::INFINITY, 0.0f64), |(l, h), r| (l.min(*r), h.max(*r)));
        Ok((max_rel_error(&fit1.params, &truth), max_rel_error(&fit3.params, &truth), (hi - lo) / hi))
    };
    let (e1, e3, spread) = run().map_err(|e| e.to_string())?;
    check(
        e1 <= 0.05 && e3 <= 0.05 && spread <= 0.10,
        format!(
            "single-camera max rel err {e1:.2e}, 3-camera {e3:.2e}, residual spread {:.1}% (limits 5%, 5%, 10%)",
            spread * 100.0
        ),
    )
}

// ---------------------------------------------------------------- 4, 5

struct DeglareRun {
    deglare: f64,
    input: f64,
    wiener: f64,
    report: DeglareReport,
    max: f64,
}

fn deglare_runs() -> glarekit::Result<Vec<DeglareRun>> {
    let n = 128;
    let ceiling = 10.0;
    let p = GsfParams::default().canonical(n, n);
    let k = rasterize_kernel(&p, n, n)?;
    let opts = DeglareOptions { ceiling: Some(ceiling), ..Default::default() };
    (0..20u64)
        .map(|seed| {
            let x = make_scene(&SceneSpec::tunnel(n, n, seed))?;
            let (y, rec) = degrade(&x, &p, ceiling, 0.0, seed)?;
            assert!(rec.clipped_count() > 0, "seed {seed} has no clipped source");
            let u: Vec<bool> =
                detect_saturation(&y, opts.sat_threshold, opts.ceiling)?.mask().iter().map(|m| !m).collect();
            let eps = 1e-6 * x.max();
            let (out, report) = deglare(&y, &k, &opts)?;
            let plain = wiener_deconvolve(&y, &k, &WienerConfig { nsr: opts.nsr })?;
            Ok(DeglareRun {
                deglare: log_rmse(out.data(), x.data(), Some(&u), eps),
                input: log_rmse(y.data(), x.data(), Some(&u), eps),
                wiener: log_rmse(plain.data(), x.data(), Some(&u), eps),
                report,
                max: y.max(),
            })
        })
        .collect()
}

fn saturation_superiority(runs: &[DeglareRun]) -> Outcome {
    let beat_input = runs.iter().filter(|r| r.deglare < r.input).count();
    let beat_wiener = runs.iter().filter(|r| r.deglare <= r.wiener).count();
    let mean = |f: fn(&DeglareRun) -> f64| runs.iter().map(f).sum::<f64>() / runs.len() as f64;
    check(
        runs.len() >= 20 && beat_input >= 19 && beat_wiener >= 18,
        format!(
            "{beat_input}/{} below input, {beat_wiener}/{} at or below Wiener (need 19, 18); mean log-RMSE deglare {:.3}, input {:.3}, Wiener {:.3}",
            runs.len(),
            runs.len(),
            mean(|r| r.deglare),
            mean(|r| r.input),
            mean(|r| r.wiener)
        ),
    )
}

fn constraint_satisfaction(runs: &[DeglareRun]) -> Outcome {
    let mut failures = Vec::new();
    for (seed, r) in runs.iter().enumerate() {
        let tol = 1e-6 * r.max;
        let rep = &r.report;
        let u_ok = rep.unsaturated_residual_min.is_some_and(|v| v >= -tol);
        let d_ok = rep.dark_output_min.is_some_and(|v| v >= 0.0);
        let out_ok = rep.deconvolved_min >= -tol;
        if !(u_ok && d_ok && out_ok) {
            failures.push(seed);
        }
    }
    let worst_u =
        runs.iter().filter_map(|r| r.report.unsaturated_residual_min.map(|v| v / r.max)).fold(f64::INFINITY, f64::min);
    check(
        failures.is_empty(),
        format!("{} runs, failing seeds {failures:?}; worst unsaturated residual {worst_u:.2e} of max", runs.len()),
    )
}

// ---------------------------------------------------------------- 6

fn merge_fidelity() -> Outcome {
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for (seed, (w, h)) in [(64, 48), (128, 128), (97, 61)].into_iter().enumerate() {
        let scene = make_scene(&SceneSpec::tunnel(w, h, seed as u64)).map_err(|e| e.to_string())?;
        let ceiling = 100.0;
        let stack = make_exposure_stack(&scene, &[0.1, 0.8, 6.4], ceiling, 0.0, 0).map_err(|e| e.to_string())?;
        let merged = merge_hdr(&stack).map_err(|e| e.to_string())?;
        for (i, (&m, &x)) in merged.data().iter().zip(scene.data()).enumerate() {
            if stack.frames().iter().any(|f| f.image().data()[i] < 0.98 * ceiling) {
                let err = if x == 0.0 { m.abs() } else { ((m - x) / x).abs() };
                worst = worst.max(err);
                checked += 1;
            }
        }
    }
    check(worst <= 1e-6, format!("{checked} usable pixels, worst relative error {worst:.2e} (limit 1e-6)"))
}

// ---------------------------------------------------------------- 7

fn transfer_exactness() -> Outcome {
    let apply = |tf: TransferFunction, v: f64| tf.apply(v).unwrap_or(f64::NAN);
    let log16 = TransferFunction::Log { n_bits: 16 };
    let identity = TransferFunction::Linear { m: 1.0, c: 0.0 };
    let endpoints = [
        (apply(TransferFunction::Gamma { gamma: 2.0 }, 0.25), 0.5),
        (apply(log16, 65535.0), 1.0),
        (apply(log16, 1.0), 0.0),
        (apply(log16, 0.5), 0.0),
        (apply(identity, 0.0), 0.0),
        (apply(identity, 0.375), 0.375),
        (apply(identity, 1.0), 1.0),
    ];
    let endpoint_err = endpoints.iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_ratio = 0.0f64;
    for chunk in 0..10 {
        let bits = 1 + (chunk * 3 % 16) as u32;
        let data: Vec<f64> = (0..1000).map(|_| rng.random::<f64>() * 10.0).collect();
        let img = RadianceMap::new(1000, 1, 1, data).map_err(|e| e.to_string())?;
        let enc = encode(&img, TransferFunction::Gamma { gamma: 2.2 }, Some(10.0)).map_err(|e| e.to_string())?;
        let q = quantize(&enc, bits).map_err(|e| e.to_string())?;
        let bound = 0.5 / ((1u64 << bits) - 1) as f64;
        for (a, b) in q.values().iter().zip(enc.values()) {
            worst_ratio = worst_ratio.max((a - b).abs() / bound);
        }
    }
    check(
        endpoint_err <= 1e-12 && worst_ratio <= 1.0 + 1e-12,
        format!(
            "endpoint max error {endpoint_err:.1e}; 1e4 samples, worst quantisation error {worst_ratio:.4} of bound"
        ),
    )
}

// ---------------------------------------------------------------- 8

type IBox = (i64, i64, i64, i64);

fn area(b: IBox) -> i64 {
    (b.2 - b.0) * (b.3 - b.1)
}

fn overlap(a: IBox, b: IBox) -> IBox {
    let r = (a.0.max(b.0), a.1.max(b.1), a.2.min(b.2), a.3.min(b.3));
    if r.0 < r.2 && r.1 < r.3 {
        r
    } else {
        (0, 0, 0, 0)
    }
}

fn bx(b: IBox) -> BoundingBox {
    BoundingBox::new(b.0 as f64, b.1 as f64, b.2 as f64, b.3 as f64)
}

fn set(boxes: Vec<BoundingBox>) -> DetectionSet {
    DetectionSet { image_id: "x".into(), boxes }
}

fn all_boxes(n: i64) -> Vec<IBox> {
    let mut out = Vec::new();
    for x1 in 0..n {
        for x2 in x1 + 1..=n {
            for y1 in 0..n {
                for y2 in y1 + 1..=n {
                    out.push((x1, y1, x2, y2));
                }
            }
        }
    }
    out
}

fn analytic_iou(a: IBox, b: IBox) -> f64 {
    let i = area(overlap(a, b));
    i as f64 / (area(a) + area(b) - i) as f64
}

/// Exhaustive over every pair of integer boxes in an 8x8 frame, every pair
/// with one box fixed per row of a 20x20 frame, and seeded 20x20 pairs.
fn miou_oracle() -> (usize, usize) {
    let mut cases = 0;
    let mut wrong = 0;
    let mut test = |a: IBox, b: IBox| {
        cases += 1;
        if miou(&set(vec![bx(a)]), &set(vec![bx(b)])) != analytic_iou(a, b) {
            wrong += 1;
        }
    };
    let small = all_boxes(8);
    for &a in &small {
        for &b in &small {
            test(a, b);
        }
    }
    let large = all_boxes(20);
    for &a in large.iter().step_by(4409) {
        for &b in &large {
            test(a, b);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100_000 {
        test(large[rng.random_range(0..large.len())], large[rng.random_range(0..large.len())]);
    }
    // two-box predicted union against one reference box
    for _ in 0..20_000 {
        let (a, b, r) = (
            large[rng.random_range(0..large.len())],
            large[rng.random_range(0..large.len())],
            large[rng.random_range(0..large.len())],
        );
        let union_p = area(a) + area(b) - area(overlap(a, b));
        let inter = area(overlap(a, r)) + area(overlap(b, r)) - area(overlap(overlap(a, b), r));
        let expected = inter as f64 / (union_p + area(r) - inter) as f64;
        cases += 1;
        if miou(&set(vec![bx(a), bx(b)]), &set(vec![bx(r)])) != expected {
            wrong += 1;
        }
    }
    (cases, wrong)
}

fn entry(id: u64, x: f64) -> TrackEntry {
    TrackEntry { id, bbox: BoundingBox::new(x, 0.0, x + 10.0, 10.0) }
}

fn metric_oracles() -> Outcome {
    let (cases, wrong) = miou_oracle();

    let refs = vec![set(vec![bx((0, 0, 10, 10)), bx((20, 20, 30, 30))])];
    let preds = vec![set(refs[0].boxes.iter().map(|b| b.clone().with_score(0.9)).collect())];
    let ap = average_precision(&preds, &refs, 0.5).map_err(|e| e.to_string())?;

    let class_refs = vec![set(vec![
        bx((0, 0, 10, 10)).with_class("car"),
        bx((20, 0, 30, 10)).with_class("person"),
        bx((40, 0, 50, 10)).with_class("sign"),
        bx((60, 0, 70, 10)).with_class("sign"),
    ])];
    let class_preds = vec![set(vec![
        bx((0, 0, 10, 10)).with_class("car").with_score(0.9),
        bx((20, 0, 30, 10)).with_class("person").with_score(0.8),
        bx((40, 0, 50, 10)).with_class("sign").with_score(0.7),
    ])];
    let map = mean_ap(&class_preds, &class_refs, 0.5).map_err(|e| e.to_string())?;

    let tracks: Vec<TrackFrame> =
        (0..5).map(|t| TrackFrame { t, entries: vec![entry(1, 0.0), entry(2, 40.0)] }).collect();
    let mut pred_tracks = tracks.clone();
    pred_tracks[1].entries.remove(0);
    pred_tracks[4].entries.push(entry(7, 100.0));
    let mota = mota_motp(&pred_tracks, &tracks, 0.5).map_err(|e| e.to_string())?.mota;

    let pts = [[1.0, 2.0], [3.5, 4.0], [-2.0, 7.0]];
    let lane = LanePointSet { image_id: "x".into(), points: vec![[10.0, 0.0], [14.0, 8.0], [20.0, 20.0]] };
    let depth: Vec<f64> = (1..50).map(|i| i as f64 * 0.7).collect();
    let identities = [
        rmse_point_pairs(&pts, &pts).map_err(|e| e.to_string())?,
        rmse_points(&lane, &lane).map_err(|e| e.to_string())?,
        rmse_depth(&depth, &depth, None).map_err(|e| e.to_string())?,
    ];

    check(
        wrong == 0
            && ap == 1.0
            && format!("{map:.4}") == "0.8333"
            && (mota - 0.8).abs() < 1e-12
            && identities == [0.0; 3],
        format!(
            "MIoU {}/{cases} exact; AP {ap}; mAP {map:.4}; MOTA {mota}; RMSE identities {identities:?}",
            cases - wrong
        ),
    )
}

// ---------------------------------------------------------------- 9

fn files(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(&dir).into_iter().flatten().flatten() {
            let p = e.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).expect("under root").to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let cfg = dir.path().join(format!("{run}.json"));
        let text = format!(
            r#"{{
  "version": 1,
  "input": {{ "kind": "synth", "preset": "tunnel", "noise": 0.001 }},
  "glare_a": {{ "method": "deglare", "options": {{ "solver": {{ "tol_fraction": 0.003 }} }} }},
  "encode": {{ "tf": {{ "type": "gamma", "gamma": 2.2 }}, "quant_bits": 8 }},
  "glare_b": {{ "method": "unsharp", "sigma": 2.0, "amount": 0.5 }},
  "score": [{{ "metric": "log-rmse" }}],
  "output_dir": "out_{run}"
}}"#
        );
        fs::write(&cfg, text).map_err(|e| e.to_string())?;
        let status = Command::new(env!("CARGO_BIN_EXE_glarekit"))
            .args(["--seed", "42", "pipeline", "--config"])
            .arg(&cfg)
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("pipeline run {run} exited with {status}"));
        }
        outputs.push(dir.path().join(format!("out_{run}")));
    }
    let (a, b) = (files(&outputs[0]), files(&outputs[1]));
    if a != b {
        return Err(format!("file sets differ: {a:?} vs {b:?}"));
    }
    let differing: Vec<&PathBuf> =
        a.iter().filter(|f| fs::read(outputs[0].join(f)).ok() != fs::read(outputs[1].join(f)).ok()).collect();
    check(differing.is_empty(), format!("{} files compared, differing {differing:?}", a.len()))
}

// ----------------------------------------------------------------

/// `prior` is time already spent on shared work for this criterion.
fn report(n: usize, limit: Option<Duration>, prior: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let outcome = f();
    let elapsed = t.elapsed() + prior;
    let late = limit.is_some_and(|l| elapsed > l);
    let (pass, detail) = match outcome {
        Ok(d) if !late => (true, d),
        Ok(d) => (false, format!("{d}; runtime over {:?}", limit.expect("late implies a limit"))),
        Err(d) => (false, d),
    };
    println!("criterion {n}: {} {detail} ({:.2}s)", if pass { "PASS" } else { "FAIL" }, elapsed.as_secs_f64());
    pass
}

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    let mut ok = true;
    ok &= report(1, secs(10), Duration::ZERO, fourier_equivalence);
    ok &= report(2, secs(10), Duration::ZERO, wiener_round_trip);
    ok &= report(3, secs(120), Duration::ZERO, calibration_recovery);
    let t = Instant::now();
    let runs = deglare_runs();
    let shared = t.elapsed();
    match runs {
        Ok(runs) => {
            ok &= report(4, secs(300), shared, || saturation_superiority(&runs));
            ok &= report(5, None, shared, || constraint_satisfaction(&runs));
        }
        Err(e) => {
            ok &= report(4, None, shared, || Err(format!("deglare failed: {e}")));
            ok &= report(5, None, shared, || Err(format!("deglare failed: {e}")));
        }
    }
    ok &= report(6, None, Duration::ZERO, merge_fidelity);
    ok &= report(7, None, Duration::ZERO, transfer_exactness);
    ok &= report(8, None, Duration::ZERO, metric_oracles);
    ok &= report(9, None, Duration::ZERO, determinism);
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
