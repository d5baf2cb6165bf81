use num_complex::Complex64;

/// Least-squares solution of `A x ≈ b` via the normal equations, with `A`
/// given row-major as `rows × cols`.
pub fn least_squares(a: &[Complex64], rows: usize, cols: usize, b: &[Complex64]) -> Option<Vec<Complex64>> {
    assert_eq!(a.len(), rows * cols);
    assert_eq!(b.len(), rows);
    let mut m = vec![Complex64::new(0.0, 0.0); cols * cols];
    let mut rhs = vec![Complex64::new(0.0, 0.0); cols];
    for r in 0..rows {
        let row = &a[r * cols..(r + 1) * cols];
        for i in 0..cols {
            let ci = row[i].conj();
            rhs[i] += ci * b[r];
            for j in 0..cols {
                m[i * cols + j] += ci * row[j];
            }
        }
    }
    solve(&mut m, &mut rhs, cols)
}

/// Gaussian elimination with partial pivoting; consumes its inputs.
pub fn solve(m: &mut [Complex64], rhs: &mut [Complex64], n: usize) -> Option<Vec<Complex64>> {
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x * n + col].norm().total_cmp(&m[y * n + col].norm()))?;
        if m[piv * n + col].norm() < 1e-300 {
            return None;
        }
        if piv != col {
            for j in 0..n {
                m.swap(piv * n + j, col * n + j);
            }
            rhs.swap(piv, col);
        }
        let d = m[col * n + col];
        for r in col + 1..n {
            let f = m[r * n + col] / d;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in col..n {
                let v = m[col * n + j];
                m[r * n + j] -= f * v;
            }
            let v = rhs[col];
            rhs[r] -= f * v;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for r in (0..n).rev() {
        let mut s = rhs[r];
        for j in r + 1..n {
            s -= m[r * n + j] * x[j];
        }
        x[r] = s / m[r * n + r];
    }
    Some(x)
}
