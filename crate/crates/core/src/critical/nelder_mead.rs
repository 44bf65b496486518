//! Derivative-free simplex minimization.
//!
//! Standard coefficients: reflection 1, expansion 2, contraction 0.5,
//! shrink 0.5. After a run stalls (collapsed simplex or flat values) the
//! search restarts from the best vertex with a smaller simplex.

#[derive(Clone, Debug)]
pub struct NmOptions {
    pub max_iters: usize,
    pub restarts: usize,
    /// Stop a run when the simplex diameter falls below this times `1 + |x|`.
    pub xtol: f64,
}

impl Default for NmOptions {
    fn default() -> Self {
        NmOptions { max_iters: 200, restarts: 2, xtol: 1e-14 }
    }
}

#[derive(Clone, Debug)]
pub struct NmResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

const ALPHA: f64 = 1.0;
const GAMMA: f64 = 2.0;
const RHO: f64 = 0.5;
const SIGMA: f64 = 0.5;

/// Minimize `f` from `x0` with initial simplex offsets `step`. Every
/// evaluated point is reported to `visit` in evaluation order.
pub fn minimize<F, V>(mut f: F, x0: &[f64], step: &[f64], opts: &NmOptions, mut visit: V) -> NmResult
where
    F: FnMut(&[f64]) -> f64,
    V: FnMut(&[f64], f64),
{
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        let v = f(x);
        *evals += 1;
        visit(x, v);
        v
    };

    let mut best_x = x0.to_vec();
    let mut best_v = eval(x0, &mut evals);
    if n == 0 {
        return NmResult { x: best_x, value: best_v, evaluations: evals };
    }
    let mut scale = 1.0;
    for _run in 0..=opts.restarts {
        let mut simplex: Vec<Vec<f64>> = vec![best_x.clone()];
        let mut values = vec![best_v];
        for j in 0..n {
            let mut v = best_x.clone();
            v[j] += step[j] * scale;
            values.push(eval(&v, &mut evals));
            simplex.push(v);
        }

        for _ in 0..opts.max_iters {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
            let (b, w, sw) = (order[0], order[n], order[n - 1]);

            let size = simplex.iter().map(|v| dist(v, &simplex[b])).fold(0.0, f64::max);
            let xnorm = simplex[b].iter().map(|v| v * v).sum::<f64>().sqrt();
            let flat = values[w] == values[b] && values[b].is_finite();
            if size <= opts.xtol * (1.0 + xnorm) || flat {
                break;
            }

            let mut centroid = vec![0.0; n];
            for &i in &order[..n] {
                for (c, v) in centroid.iter_mut().zip(&simplex[i]) {
                    *c += v / n as f64;
                }
            }
            let along =
                |t: f64| -> Vec<f64> { centroid.iter().zip(&simplex[w]).map(|(c, x)| c + t * (c - x)).collect() };

            let xr = along(ALPHA);
            let fr = eval(&xr, &mut evals);
            if fr < values[b] {
                let xe = along(ALPHA * GAMMA);
                let fe = eval(&xe, &mut evals);
                if fe < fr {
                    simplex[w] = xe;
                    values[w] = fe;
                } else {
                    simplex[w] = xr;
                    values[w] = fr;
                }
                continue;
            }
            if fr < values[sw] {
                simplex[w] = xr;
                values[w] = fr;
                continue;
            }
            let (xc, fc) = if fr < values[w] {
                let xc = along(ALPHA * RHO);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = along(-RHO);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < values[w].min(fr) {
                simplex[w] = xc;
                values[w] = fc;
                continue;
            }
            // shrink toward the best vertex
            let xb = simplex[b].clone();
            for i in 0..=n {
                if i == b {
                    continue;
                }
                let shrunk: Vec<f64> = xb.iter().zip(&simplex[i]).map(|(p, q)| p + SIGMA * (q - p)).collect();
                values[i] = eval(&shrunk, &mut evals);
                simplex[i] = shrunk;
            }
        }

        let (bi, bv) = values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
            .map(|(i, v)| (i, *v))
            .expect("nonempty simplex");
        if bv < best_v {
            best_v = bv;
            best_x = simplex[bi].clone();
        }
        scale *= 0.1;
    }
    NmResult { x: best_x, value: best_v, evaluations: evals }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
