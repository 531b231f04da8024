//! Small dense solver for the Newton systems (p is at most a handful here).

/// Solve `A x = b` in place via LU with partial pivoting; `a` is row-major
/// `n x n` and is destroyed. Returns `None` when the matrix is numerically
/// singular. On success `b` holds the solution.
pub fn solve_in_place(a: &mut [f64], b: &mut [f64], n: usize) -> Option<()> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);

    let scale: f64 = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let tiny = 1e-12 * scale;

    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_val = a[col * n + col].abs();
        for r in (col + 1)..n {
            let v = a[r * n + col].abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = r;
            }
        }
        if pivot_val < tiny || !pivot_val.is_finite() {
            return None;
        }
        if pivot_row != col {
            for c in 0..n {
                a.swap(pivot_row * n + c, col * n + c);
            }
            b.swap(pivot_row, col);
        }
        let p = a[col * n + col];
        for r in (col + 1)..n {
            let f = a[r * n + col] / p;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[r * n + c] -= f * a[col * n + c];
            }
            b[r] -= f * b[col];
        }
    }

    for row in (0..n).rev() {
        let mut acc = b[row];
        for c in (row + 1)..n {
            acc -= a[row * n + c] * b[c];
        }
        b[row] = acc / a[row * n + row];
    }
    if b.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(())
}
