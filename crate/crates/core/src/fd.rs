//! Finite-difference derivatives on arbitrary (possibly non-uniform) grids.

/// Fornberg's weights for the `order`-th derivative at `x0` using the nodes
/// `xs`. Returns one weight per node.
pub fn weights(x0: f64, xs: &[f64], order: usize) -> Vec<f64> {
    let n = xs.len();
    // c[j][k]: weight of node j for derivative k.
    let mut c = vec![vec![0.0; order + 1]; n];
    if n == 0 {
        return Vec::new();
    }
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// First derivative of `ys(xs)` at every node whose centred stencil fits.
///
/// Uses the widest of the seven-, five- and three-point stencils that the node
/// count allows. Returns `(index, derivative)` pairs for the interior nodes
/// only.
pub fn centered_first_derivative(xs: &[f64], ys: &[f64]) -> Vec<(usize, f64)> {
    assert_eq!(xs.len(), ys.len());
    let half = match xs.len() {
        7.. => 3,
        5 | 6 => 2,
        _ => 1,
    };
    if xs.len() < 2 * half + 1 {
        return Vec::new();
    }
    (half..xs.len() - half)
        .map(|i| {
            let nodes = &xs[i - half..=i + half];
            let w = weights(xs[i], nodes, 1);
            let d = w.iter().zip(&ys[i - half..=i + half]).map(|(a, b)| a * b).sum();
            (i, d)
        })
        .collect()
}
