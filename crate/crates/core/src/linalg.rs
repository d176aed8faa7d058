//! Small dense symmetric eigenvalue routine.

use crate::scalar::Real;

/// Eigenvalues of a symmetric `n x n` row-major matrix by cyclic Jacobi
/// rotations, returned in ascending order.
pub fn symmetric_eigenvalues<T: Real>(entries: &[T], n: usize) -> Vec<T> {
    assert_eq!(entries.len(), n * n, "matrix must be n x n");
    let mut a = entries.to_vec();
    let idx = |r: usize, c: usize| r * n + c;
    let frob: T = a.iter().map(|v| *v * *v).sum::<T>().sqrt();
    if frob.is_zero() || n == 1 {
        let mut d: Vec<T> = (0..n).map(|i| a[idx(i, i)]).collect();
        d.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
        return d;
    }
    let tol = T::epsilon() * frob;
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|r| (0..n).filter(move |c| *c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[idx(r, c)] * a[idx(r, c)])
            .sum::<T>()
            .sqrt();
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[idx(p, q)];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let app = a[idx(p, p)];
                let aqq = a[idx(q, q)];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[idx(k, p)];
                    let akq = a[idx(k, q)];
                    a[idx(k, p)] = c * akp - s * akq;
                    a[idx(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[idx(p, k)];
                    let aqk = a[idx(q, k)];
                    a[idx(p, k)] = c * apk - s * aqk;
                    a[idx(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut d: Vec<T> = (0..n).map(|i| a[idx(i, i)]).collect();
    d.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    d
}
