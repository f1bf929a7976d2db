//! Nelder–Mead simplex search with projection onto a box.

/// Stopping rules and limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub max_iterations: usize,
    /// Relative spread of objective values across the simplex.
    pub f_tol: f64,
    /// Largest vertex distance from the best vertex.
    pub x_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { max_iterations: 2000, f_tol: 1e-8, x_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimises `f` from `x0`, with the initial simplex spanned by `steps` along
/// the axes. Every trial point is passed through `project` first; `f` may
/// return infinity to reject a point.
pub fn minimize<F, P>(mut f: F, x0: &[f64], steps: &[f64], opts: SimplexOptions, project: P) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
    P: Fn(&mut [f64]),
{
    let n = x0.len();
    let project = &project;
    let mut eval = |x: &mut Vec<f64>| {
        project(x);
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut pts: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let mut start = x0.to_vec();
    let f0 = eval(&mut start);
    pts.push((start, f0));
    for i in 0..n {
        let mut x = pts[0].0.clone();
        x[i] += steps[i];
        project(&mut x);
        if x == pts[0].0 {
            // projected back onto the start: step the other way
            x[i] = pts[0].0[i] - steps[i];
        }
        let fx = eval(&mut x);
        pts.push((x, fx));
    }

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iterations {
        pts.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (fb, fw) = (pts[0].1, pts[n].1);
        let spread = fw - fb;
        let diameter = pts[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&pts[0].0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        if (fb.is_finite() && spread <= opts.f_tol * fb.abs() + f64::MIN_POSITIVE) || diameter < opts.x_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for (x, _) in &pts[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&pts[n].0).map(|(c, w)| c + t * (c - w)).collect() };
        let mut xr = along(1.0);
        let fr = eval(&mut xr);
        if fr < pts[0].1 {
            let mut xe = along(2.0);
            let fe = eval(&mut xe);
            pts[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < pts[n - 1].1 {
            pts[n] = (xr, fr);
            continue;
        }
        let (mut xc, fc_bound) = if fr < pts[n].1 { (along(0.5), fr) } else { (along(-0.5), pts[n].1) };
        let fc = eval(&mut xc);
        if fc < fc_bound {
            pts[n] = (xc, fc);
            continue;
        }
        let best = pts[0].0.clone();
        for p in pts.iter_mut().skip(1) {
            let mut x: Vec<f64> = best.iter().zip(&p.0).map(|(b, v)| b + 0.5 * (v - b)).collect();
            let fx = eval(&mut x);
            *p = (x, fx);
        }
    }
    pts.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, f) = pts.swap_remove(0);
    SimplexResult { x, f, iterations, converged }
}
