//! Unitary DFT helpers over slices and matrix axes.
//!
//! Forward transforms follow the `exp(-j2πmn/N)` sign convention and every
//! transform here is scaled by `1/√N`, so forward and inverse are adjoint.

use std::cell::RefCell;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        match dir {
            Direction::Forward => p.plan_fft_forward(n),
            Direction::Inverse => p.plan_fft_inverse(n),
        }
    })
}

/// Unnormalized transform in place.
pub fn fft_raw(buf: &mut [C64], dir: Direction) {
    if buf.len() <= 1 {
        return;
    }
    plan(buf.len(), dir).process(buf);
}

/// Unitary transform in place.
pub fn fft_unitary(buf: &mut [C64], dir: Direction) {
    if buf.is_empty() {
        return;
    }
    fft_raw(buf, dir);
    let s = 1.0 / (buf.len() as f64).sqrt();
    buf.iter_mut().for_each(|v| *v *= s);
}

pub fn fft(buf: &mut [C64]) {
    fft_unitary(buf, Direction::Forward)
}

pub fn ifft(buf: &mut [C64]) {
    fft_unitary(buf, Direction::Inverse)
}

/// Unitary transform of every column.
pub fn transform_columns(m: &mut DMatrix<C64>, dir: Direction) {
    let rows = m.nrows();
    if rows == 0 {
        return;
    }
    m.as_mut_slice()
        .par_chunks_mut(rows)
        .for_each(|col| fft_unitary(col, dir));
}

/// Unitary transform of every row.
pub fn transform_rows(m: &mut DMatrix<C64>, dir: Direction) {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return;
    }
    let mut t = m.transpose();
    t.as_mut_slice()
        .par_chunks_mut(cols)
        .for_each(|row| fft_unitary(row, dir));
    debug_assert_eq!(t.shape(), (cols, rows));
    *m = t.transpose();
}

/// Circular shift moving the zero bin to the centre (`⌊n/2⌋`).
pub fn fftshift<T: Clone>(v: &[T]) -> Vec<T> {
    let n = v.len();
    let mut out = v.to_vec();
    out.rotate_right(n / 2);
    out
}

pub fn ifftshift<T: Clone>(v: &[T]) -> Vec<T> {
    let n = v.len();
    let mut out = v.to_vec();
    out.rotate_left(n / 2);
    out
}

/// Two-dimensional [`fftshift`].
pub fn fftshift2(m: &DMatrix<C64>) -> DMatrix<C64> {
    let (r, c) = m.shape();
    DMatrix::from_fn(r, c, |i, j| m[((i + r - r / 2) % r, (j + c - c / 2) % c)])
}

pub fn ifftshift2(m: &DMatrix<C64>) -> DMatrix<C64> {
    let (r, c) = m.shape();
    DMatrix::from_fn(r, c, |i, j| m[((i + r / 2) % r, (j + c / 2) % c)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[C64]) -> Vec<C64> {
        let n = x.len();
        (0..n)
            .map(|m| {
                x.iter().enumerate().fold(C64::new(0.0, 0.0), |acc, (k, v)| {
                    let ph = -2.0 * std::f64::consts::PI * (m * k) as f64 / n as f64;
                    acc + v * C64::from_polar(1.0, ph)
                }) / (n as f64).sqrt()
            })
            .collect()
    }

    #[test]
    fn unitary_forward_matches_naive_dft() {
        let x: Vec<C64> = (0..12)
            .map(|k| C64::new((k as f64).sin(), (0.3 * k as f64).cos()))
            .collect();
        let mut y = x.clone();
        fft(&mut y);
        for (a, b) in y.iter().zip(naive_dft(&x)) {
            assert!((a - b).norm() < 1e-12);
        }
        ifft(&mut y);
        for (a, b) in y.iter().zip(&x) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn shifts_are_inverse() {
        for n in [1usize, 4, 5] {
            let v: Vec<usize> = (0..n).collect();
            assert_eq!(ifftshift(&fftshift(&v)), v);
        }
        assert_eq!(fftshift(&[0, 1, 2, 3, 4]), vec![3, 4, 0, 1, 2]);
        let m = DMatrix::from_fn(3, 4, |i, j| C64::new(i as f64, j as f64));
        assert_eq!(ifftshift2(&fftshift2(&m)), m);
        assert_eq!(fftshift2(&m)[(1, 2)], m[(0, 0)]);
    }

    #[test]
    fn row_and_column_transforms_commute() {
        let m = DMatrix::from_fn(6, 5, |i, j| C64::new((i * 7 + j) as f64, (i as f64) - j as f64));
        let mut a = m.clone();
        transform_rows(&mut a, Direction::Forward);
        transform_columns(&mut a, Direction::Inverse);
        let mut b = m.clone();
        transform_columns(&mut b, Direction::Inverse);
        transform_rows(&mut b, Direction::Forward);
        assert!((a - b).norm() < 1e-10);
    }
}
