//! Probabilists' Hermite polynomials `He_n` and derivatives.
//!
//! The convention is fixed by the explicit low orders used throughout the
//! oscillator eigenstates: `He_2(x) = x^2 - 1`, `He_3(x) = x^3 - 3x`.

/// Value of `He_n(x)` via the recurrence `He_{n+1} = x He_n - n He_{n-1}`.
pub fn he(n: u32, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return 1.0;
    }
    for k in 1..n {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `(He_n, He_n', He_n'')` at `x`, using `He_n' = n He_{n-1}`.
pub fn he_d2(n: u32, x: f64) -> (f64, f64, f64) {
    let h = he(n, x);
    let d1 = if n == 0 { 0.0 } else { n as f64 * he(n - 1, x) };
    let d2 = if n < 2 {
        0.0
    } else {
        (n * (n - 1)) as f64 * he(n - 2, x)
    };
    (h, d1, d2)
}
