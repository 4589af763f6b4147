/// Jacobi-preconditioned conjugate gradients for an SPD operator.
///
/// Returns the solution, the iteration count and the final relative residual.
pub(crate) fn pcg<A>(
    apply: A,
    diagonal: &[f64],
    rhs: &[f64],
    rel_tol: f64,
    max_iters: usize,
) -> (Vec<f64>, usize, f64)
where
    A: Fn(&[f64], &mut [f64]),
{
    let n = rhs.len();
    let mut x = vec![0.0; n];
    let b_norm = norm(rhs);
    if b_norm == 0.0 {
        return (x, 0, 0.0);
    }
    let mut r = rhs.to_vec();
    let mut z: Vec<f64> = r.iter().zip(diagonal).map(|(ri, di)| ri / di).collect();
    let mut d = z.clone();
    let mut q = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut rel = 1.0;
    for it in 0..max_iters {
        apply(&d, &mut q);
        let dq = dot(&d, &q);
        if dq <= 0.0 {
            return (x, it, rel);
        }
        let step = rz / dq;
        for i in 0..n {
            x[i] += step * d[i];
            r[i] -= step * q[i];
        }
        rel = norm(&r) / b_norm;
        if rel <= rel_tol {
            return (x, it + 1, rel);
        }
        for i in 0..n {
            z[i] = r[i] / diagonal[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            d[i] = z[i] + beta * d[i];
        }
    }
    (x, max_iters, rel)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_tridiagonal() {
        // -x_{i-1} + 2 x_i - x_{i+1} = 1 with zero boundary; x_i = i (n + 1 - i) / 2
        let n = 50;
        let apply = |v: &[f64], out: &mut [f64]| {
            for i in 0..n {
                let left = if i > 0 { v[i - 1] } else { 0.0 };
                let right = if i + 1 < n { v[i + 1] } else { 0.0 };
                out[i] = 2.0 * v[i] - left - right;
            }
        };
        let (x, iters, rel) = pcg(apply, &vec![2.0; n], &vec![1.0; n], 1e-13, 500);
        assert!(rel <= 1e-13, "rel {rel} after {iters}");
        for (i, xi) in x.iter().enumerate() {
            let k = (i + 1) as f64;
            assert!((xi - k * (n as f64 + 1.0 - k) / 2.0).abs() < 1e-9);
        }
    }
}
