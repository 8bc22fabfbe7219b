//! Finite-difference weights on arbitrary 1D node sets (Fornberg's recursion).

/// Weights `c[k][j]` such that `f^(k)(z) ~ sum_j c[k][j] f(x[j])` for
/// `k = 0..=max_order`.
pub fn fornberg_weights(z: f64, x: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    if n == 0 {
        return c;
    }
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Value, first and second derivative weights at `z` on the nodes `x`.
#[derive(Debug, Clone)]
pub struct Stencil {
    /// Offsets into the caller's node index space.
    pub nodes: Vec<isize>,
    pub value: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

impl Stencil {
    pub fn new(z: f64, positions: &[f64], nodes: Vec<isize>) -> Self {
        let w = fornberg_weights(z, positions, 2);
        let mut it = w.into_iter();
        Stencil {
            nodes,
            value: it.next().unwrap_or_default(),
            d1: it.next().unwrap_or_default(),
            d2: it.next().unwrap_or_default(),
        }
    }

    /// Applies value, first and second derivative weights to `sample(node)`.
    pub fn apply(&self, sample: impl Fn(isize) -> f64) -> (f64, f64, f64) {
        let mut out = (0.0, 0.0, 0.0);
        for (k, &node) in self.nodes.iter().enumerate() {
            let v = sample(node);
            out.0 += self.value[k] * v;
            out.1 += self.d1[k] * v;
            out.2 += self.d2[k] * v;
        }
        out
    }
}

/// Points per one-sided closure stencil (fourth order for second derivatives).
pub const CLOSURE_WIDTH: usize = 6;

/// Stencils for nodes `(k + 1/2) h`, `k = 0..m`, of a cell-centred line.
///
/// With `mirrored`, indices `-1, -2, ..` are valid (reflected through the
/// origin of the line) and every node gets a centred five-point stencil
/// except near the far end; otherwise both ends use one-sided closures.
pub fn line_stencils(m: usize, h: f64, mirrored: bool) -> Vec<Stencil> {
    let pos = |k: isize| (k as f64 + 0.5) * h;
    (0..m as isize)
        .map(|i| {
            let lo_ok = mirrored || i >= 2;
            let hi_ok = i + 2 < m as isize;
            let nodes: Vec<isize> = if lo_ok && hi_ok {
                (i - 2..=i + 2).collect()
            } else if !hi_ok {
                (m as isize - CLOSURE_WIDTH as isize..m as isize).collect()
            } else {
                (0..CLOSURE_WIDTH as isize).collect()
            };
            let positions: Vec<f64> = nodes.iter().map(|&k| pos(k)).collect();
            Stencil::new(pos(i), &positions, nodes)
        })
        .collect()
}

/// One-sided stencil evaluating at the line end `s = m h`.
pub fn far_end_stencil(m: usize, h: f64) -> Stencil {
    let nodes: Vec<isize> = (m as isize - CLOSURE_WIDTH as isize..m as isize).collect();
    let positions: Vec<f64> = nodes.iter().map(|&k| (k as f64 + 0.5) * h).collect();
    Stencil::new(m as f64 * h, &positions, nodes)
}

/// One-sided stencil evaluating at the line start `s = 0`.
pub fn near_end_stencil(h: f64) -> Stencil {
    let nodes: Vec<isize> = (0..CLOSURE_WIDTH as isize).collect();
    let positions: Vec<f64> = nodes.iter().map(|&k| (k as f64 + 0.5) * h).collect();
    Stencil::new(0.0, &positions, nodes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_central_weights() {
        let w = fornberg_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 2);
        let d1 = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        let d2 = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
        for j in 0..5 {
            assert!((w[1][j] - d1[j]).abs() < 1e-14);
            assert!((w[2][j] - d2[j]).abs() < 1e-14);
        }
        assert!((w[0][2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn closures_exact_on_quartics() {
        let (m, h) = (10, 0.1);
        let f = |s: f64| 1.0 - 2.0 * s + 0.5 * s.powi(3) + s.powi(4);
        let df = |s: f64| -2.0 + 1.5 * s * s + 4.0 * s.powi(3);
        let ddf = |s: f64| 3.0 * s + 12.0 * s * s;
        let sample = |k: isize| f((k as f64 + 0.5) * h);
        for (i, st) in line_stencils(m, h, false).iter().enumerate() {
            let s = (i as f64 + 0.5) * h;
            let (v, d1, d2) = st.apply(sample);
            assert!((v - f(s)).abs() < 1e-12);
            assert!((d1 - df(s)).abs() < 1e-10);
            assert!((d2 - ddf(s)).abs() < 1e-8);
        }
        let (v, d1, d2) = far_end_stencil(m, h).apply(sample);
        assert!((v - f(1.0)).abs() < 1e-11 && (d1 - df(1.0)).abs() < 1e-9 && (d2 - ddf(1.0)).abs() < 1e-7);
        let (v, d1, _) = near_end_stencil(h).apply(sample);
        assert!((v - f(0.0)).abs() < 1e-11 && (d1 - df(0.0)).abs() < 1e-9);
    }
}
