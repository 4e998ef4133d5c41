//! Globally adaptive Gauss-Kronrod (7/15) quadrature.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated: real or complex.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod estimate on `[a, b]` with the embedded 7-point
/// Gauss difference as error estimate.
pub fn gauss_kronrod<T: QuadValue>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod = kronrod + pair * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let kronrod = kronrod * h;
    let gauss = gauss * h;
    (kronrod, (kronrod - gauss).magnitude())
}

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rel: 1e-5,
            abs: 0.0,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub error: f64,
    pub intervals: usize,
}

struct Piece<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

/// Integrates `f` over `[a, b]`, splitting first at `breakpoints` inside the
/// interval, then bisecting the worst interval until the summed error is
/// below `max(tol.abs, tol.rel * |I|)`.
pub fn integrate<T: QuadValue>(f: impl Fn(f64) -> T, a: f64, b: f64, breakpoints: &[f64], tol: Tolerance) -> Result<Integral<T>> {
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(Error::InvalidParameter(format!("integration interval [{a}, {b}]")));
    }
    let mut edges = vec![a];
    let mut inner: Vec<f64> = breakpoints.iter().copied().filter(|&p| p > a && p < b).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    edges.extend(inner);
    edges.push(b);

    let mut pieces: Vec<Piece<T>> = edges
        .windows(2)
        .map(|w| {
            let (value, error) = gauss_kronrod(&f, w[0], w[1]);
            Piece { a: w[0], b: w[1], value, error }
        })
        .collect();

    loop {
        let total = pieces.iter().fold(T::zero(), |s, p| s + p.value);
        let error: f64 = pieces.iter().map(|p| p.error).sum();
        let target = tol.abs.max(tol.rel * total.magnitude());
        if error <= target || (error == 0.0 && total.magnitude() == 0.0) {
            return Ok(Integral {
                value: total,
                error,
                intervals: pieces.len(),
            });
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one piece");
        let p = &pieces[worst];
        let mid = 0.5 * (p.a + p.b);
        if pieces.len() >= tol.max_intervals || !(mid > p.a && mid < p.b) {
            let magnitude = total.magnitude();
            return Err(Error::Quadrature {
                achieved: if magnitude > 0.0 { error / magnitude } else { error },
                requested: tol.rel,
            });
        }
        let (a0, b0) = (p.a, p.b);
        let (lv, le) = gauss_kronrod(&f, a0, mid);
        let (rv, re) = gauss_kronrod(&f, mid, b0);
        pieces[worst] = Piece { a: a0, b: mid, value: lv, error: le };
        pieces.push(Piece { a: mid, b: b0, value: rv, error: re });
    }
}
