//! Derivative-free Nelder–Mead minimization.
//!
//! Deterministic: the initial simplex is axis-aligned around the start point
//! and ties are broken by vertex order. Non-finite objective values are
//! treated as `+∞`.

#[derive(Debug, Clone, Copy)]
pub struct SimplexConfig {
    pub max_iterations: usize,
    /// Stop once every vertex lies within this distance of the best one.
    pub shrink_tolerance: f64,
}

impl Default for SimplexConfig {
    fn default() -> Self {
        SimplexConfig {
            max_iterations: 300,
            shrink_tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn order(vertices: &mut [(Vec<f64>, f64)]) {
    // stable sort keeps earlier vertices first on ties
    vertices.sort_by(|a, b| a.1.total_cmp(&b.1));
}

fn diameter(vertices: &[(Vec<f64>, f64)]) -> f64 {
    let best = &vertices[0].0;
    vertices[1..]
        .iter()
        .map(|(x, _)| {
            x.iter()
                .zip(best)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

/// Minimize `f` starting at `x0`, with initial edge lengths `steps`.
pub fn minimize<F>(mut f: F, x0: &[f64], steps: &[f64], cfg: &SimplexConfig) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    assert_eq!(steps.len(), n, "one step per coordinate");
    let mut evaluations = 0;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        sanitize(f(x))
    };

    let mut vertices: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    vertices.push((x0.to_vec(), eval(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += steps[i];
        let v = eval(&x);
        vertices.push((x, v));
    }
    order(&mut vertices);

    let mut iterations = 0;
    while iterations < cfg.max_iterations && diameter(&vertices) > cfg.shrink_tolerance {
        iterations += 1;
        let centroid: Vec<f64> = (0..n)
            .map(|j| vertices[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
            .collect();
        let worst = vertices[n].clone();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(REFLECT);
        let fr = eval(&xr);
        if fr < vertices[0].1 {
            let xe = along(EXPAND);
            let fe = eval(&xe);
            vertices[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < vertices[n - 1].1 {
            vertices[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let xc = along(CONTRACT * REFLECT);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(-CONTRACT);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < worst.1.min(fr) {
                vertices[n] = (xc, fc);
            } else {
                let best = vertices[0].0.clone();
                for v in vertices.iter_mut().skip(1) {
                    let x: Vec<f64> = best
                        .iter()
                        .zip(&v.0)
                        .map(|(b, x)| b + SHRINK * (x - b))
                        .collect();
                    let fx = eval(&x);
                    *v = (x, fx);
                }
            }
        }
        order(&mut vertices);
    }

    let (x, value) = vertices.swap_remove(0);
    SimplexResult {
        x,
        value,
        iterations,
        evaluations,
    }
}
