use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use glarekit::calib::{per_scene_residuals, CalibDataset, CalibScene};
use glarekit::deglare::{deglare, wiener_deconvolve, DeglareOptions, WienerConfig};
use glarekit::synth::{degrade, make_scene, SceneSpec};
use glarekit::{rasterize_kernel, simulate_glare, GsfParams};

const SIZES: [usize; 3] = [64, 128, 256];

fn kernel(c: &mut Criterion) {
    let mut g = c.benchmark_group("rasterize_kernel");
    for n in SIZES {
        let p = GsfParams::default().canonical(n, n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| rasterize_kernel(black_box(&p), n, n).unwrap())
        });
    }
    g.finish();
}

fn glare(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulate_glare");
    for n in SIZES {
        let x = make_scene(&SceneSpec::tunnel(n, n, 0)).unwrap();
        let k = rasterize_kernel(&GsfParams::default().canonical(n, n), n, n).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| simulate_glare(black_box(&x), &k).unwrap())
        });
    }
    g.finish();
}

fn wiener(c: &mut Criterion) {
    let mut g = c.benchmark_group("wiener_deconvolve");
    for n in SIZES {
        let p = GsfParams::default().canonical(n, n);
        let k = rasterize_kernel(&p, n, n).unwrap();
        let y = simulate_glare(&make_scene(&SceneSpec::tunnel(n, n, 0)).unwrap(), &k).unwrap();
        let cfg = WienerConfig::default();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| wiener_deconvolve(black_box(&y), &k, &cfg).unwrap())
        });
    }
    g.finish();
}

fn deglare_bench(c: &mut Criterion) {
    let mut g = c.benchmark_group("deglare");
    g.sample_size(10);
    for n in [64, 128] {
        let p = GsfParams::default().canonical(n, n);
        let k = rasterize_kernel(&p, n, n).unwrap();
        let (y, _) = degrade(&make_scene(&SceneSpec::tunnel(n, n, 0)).unwrap(), &p, 10.0, 0.0, 0).unwrap();
        let opts = DeglareOptions { ceiling: Some(10.0), ..Default::default() };
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| deglare(black_box(&y), &k, &opts).unwrap())
        });
    }
    g.finish();
}

fn joint_objective(c: &mut Criterion) {
    let mut g = c.benchmark_group("joint_objective");
    for cameras in [1, 3] {
        let n = 128;
        let p = GsfParams::default().canonical(n, n);
        let k = rasterize_kernel(&p, n, n).unwrap();
        let scenes = (0..cameras)
            .map(|i| {
                let l_in = make_scene(&SceneSpec::rig(n, n, 2.0, 100.0 * (i + 1) as f64)).unwrap();
                let l_capt = simulate_glare(&l_in, &k).unwrap();
                CalibScene::new(format!("cam{i}"), l_in, l_capt, 1.0).unwrap()
            })
            .collect();
        let ds = CalibDataset::new(scenes, 0.0).unwrap();
        let probe = GsfParams::new(0.8, 0.01, 0.5, 1.0);
        g.bench_with_input(BenchmarkId::from_parameter(cameras), &cameras, |b, _| {
            b.iter(|| per_scene_residuals(black_box(&probe), &ds).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, kernel, glare, wiener, deglare_bench, joint_objective);
criterion_main!(benches);
