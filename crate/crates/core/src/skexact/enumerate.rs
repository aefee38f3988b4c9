//! Block-split enumeration. Sites `0..n_in` form the inner block and the rest
//! the outer block. The outer block is walked in Gray-code order with local
//! fields updated per flip; for each outer state the inner weights factorise
//! into a product table. Raw moments `<prod_{i in A} sigma_i>` are read off a
//! Walsh–Hadamard transform of the weight array, restricted to the inner masks
//! of small popcount.
//!
//! Bit `i` of a configuration index set means `sigma_i = -1`.

use crate::error::{Error, Result};

pub(crate) struct Enumeration {
    pub n_in: usize,
    col_index: Vec<u32>,
    n_cols: usize,
    /// Row-major `[outer mask][column]`.
    table: Vec<f64>,
    pub log_z: f64,
    pub weights: Option<Vec<f64>>,
}

const NO_COL: u32 = u32::MAX;

impl Enumeration {
    /// Raw moment of the product of spins in `mask`.
    pub fn raw(&self, mask: u64) -> f64 {
        let a = (mask & ((1u64 << self.n_in) - 1)) as usize;
        let b = (mask >> self.n_in) as usize;
        let c = self.col_index[a];
        debug_assert!(c != NO_COL, "inner mask {a:#b} outside the requested order");
        self.table[b * self.n_cols + c as usize]
    }
}

pub(crate) fn fwht(v: &mut [f64]) {
    let n = v.len();
    let mut h = 1;
    if n >= 4 {
        for c in v.chunks_exact_mut(4) {
            let (s0, d0) = (c[0] + c[1], c[0] - c[1]);
            let (s1, d1) = (c[2] + c[3], c[2] - c[3]);
            c[0] = s0 + s1;
            c[1] = d0 + d1;
            c[2] = s0 - s1;
            c[3] = d0 - d1;
        }
        h = 4;
    }
    while h < n {
        for chunk in v.chunks_exact_mut(2 * h) {
            let (lo, hi) = chunk.split_at_mut(h);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (a, b) = (*x, *y);
                *x = a + b;
                *y = a - b;
            }
        }
        h *= 2;
    }
}

/// Transform along the leading axis of a row-major matrix with `width` columns.
pub(crate) fn fwht_rows(v: &mut [f64], width: usize) {
    let rows = v.len() / width;
    let mut h = 1;
    while h < rows {
        for block in v.chunks_exact_mut(2 * h * width) {
            let (lo, hi) = block.split_at_mut(h * width);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (a, b) = (*x, *y);
                *x = a + b;
                *y = a - b;
            }
        }
        h *= 2;
    }
}

/// `j` is the dense symmetric coupling matrix (already scaled, zero diagonal).
pub(crate) fn enumerate(
    n: usize,
    j: &[f64],
    h: f64,
    order: usize,
    keep_weights: bool,
) -> Result<Enumeration> {
    let n_in = n.div_ceil(2);
    let n_out = n - n_in;
    let size_in = 1usize << n_in;
    let size_out = 1usize << n_out;
    let jm = |a: usize, b: usize| j[a * n + b];

    // inner energies, Gray-code walk
    let mut e_in = vec![0.0; size_in];
    {
        let mut sigma = vec![1.0f64; n_in];
        let mut local: Vec<f64> = (0..n_in).map(|a| (0..n_in).map(|b| jm(a, b)).sum()).collect();
        let mut e: f64 = local.iter().sum::<f64>() * 0.5 + h * n_in as f64;
        e_in[0] = e;
        for k in 1..size_in {
            let t = k.trailing_zeros() as usize;
            e -= 2.0 * sigma[t] * (local[t] + h);
            sigma[t] = -sigma[t];
            for (a, l) in local.iter_mut().enumerate() {
                *l += 2.0 * sigma[t] * jm(a, t);
            }
            e_in[k ^ (k >> 1)] = e;
        }
    }
    let max_in = e_in.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w_in: Vec<f64> = e_in.iter().map(|&e| (e - max_in).exp()).collect();

    // outer walk state: spins, fields on inner sites, outer energy
    struct Walk {
        sigma: Vec<f64>,
        field_in: Vec<f64>,
        local_out: Vec<f64>,
        e_out: f64,
    }
    let start = || {
        let sigma = vec![1.0f64; n_out];
        let field_in: Vec<f64> = (0..n_in)
            .map(|a| (0..n_out).map(|b| jm(a, n_in + b)).sum())
            .collect();
        let local_out: Vec<f64> = (0..n_out)
            .map(|a| (0..n_out).map(|b| jm(n_in + a, n_in + b)).sum())
            .collect();
        let e_out = local_out.iter().sum::<f64>() * 0.5 + h * n_out as f64;
        Walk {
            sigma,
            field_in,
            local_out,
            e_out,
        }
    };
    let step = |w: &mut Walk, t: usize| {
        w.e_out -= 2.0 * w.sigma[t] * (w.local_out[t] + h);
        w.sigma[t] = -w.sigma[t];
        let s2 = 2.0 * w.sigma[t];
        for (a, l) in w.local_out.iter_mut().enumerate() {
            *l += s2 * jm(n_in + a, n_in + t);
        }
        for (a, f) in w.field_in.iter_mut().enumerate() {
            *f += s2 * jm(a, n_in + t);
        }
    };
    let bound = |w: &Walk| w.e_out + w.field_in.iter().map(|f| f.abs()).sum::<f64>();

    let mut col_index = vec![NO_COL; size_in];
    let mut col_masks = Vec::new();
    for (a, c) in col_index.iter_mut().enumerate() {
        if (a.count_ones() as usize) <= order {
            *c = col_masks.len() as u32;
            col_masks.push(a);
        }
    }
    let n_cols = col_masks.len();
    let mut table = vec![0.0; n_cols * size_out];
    let mut weights = keep_weights.then(|| vec![0.0; size_in * size_out]);

    // Each outer state b gets its own log-scale.
    let mut log_scale = vec![0.0; size_out];
    let mut row_sum = vec![0.0; size_out];
    let mut row = vec![0.0; size_in];
    let mut w = start();
    for k in 0..size_out {
        if k > 0 {
            step(&mut w, k.trailing_zeros() as usize);
        }
        let b = k ^ (k >> 1);
        let mut sum = fill_row(&mut row, &w.field_in, &w_in, false);
        if sum < 1e-200 {
            fill_row(&mut row, &w.field_in, &e_in, true);
            let top = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            sum = 0.0;
            for r in row.iter_mut() {
                *r = (*r - top).exp();
                sum += *r;
            }
            log_scale[b] = bound(&w) + top;
        } else {
            log_scale[b] = bound(&w) + max_in;
        }
        row_sum[b] = sum;
        if let Some(ws) = weights.as_mut() {
            ws[b * size_in..(b + 1) * size_in].copy_from_slice(&row);
        }
        fwht(&mut row);
        for (t, &a) in table[b * n_cols..(b + 1) * n_cols].iter_mut().zip(&col_masks) {
            *t = row[a];
        }
    }
    let top = log_scale
        .iter()
        .zip(&row_sum)
        .map(|(l, s)| l + s.ln())
        .fold(f64::NEG_INFINITY, f64::max);
    let factor: Vec<f64> = log_scale.iter().map(|l| (l - top).exp()).collect();
    let z: f64 = row_sum.iter().zip(&factor).map(|(s, f)| s * f).sum();
    if !(z.is_finite() && z > 0.0) {
        return Err(Error::Numeric(format!(
            "partition function underflowed or overflowed (scaled Z = {z})"
        )));
    }
    for (chunk, f) in table.chunks_exact_mut(n_cols).zip(&factor) {
        let s = f / z;
        for v in chunk {
            *v *= s;
        }
    }
    fwht_rows(&mut table, n_cols);
    if let Some(ws) = weights.as_mut() {
        for (chunk, f) in ws.chunks_exact_mut(size_in).zip(&factor) {
            for v in chunk {
                *v *= f / z;
            }
        }
    }
    Ok(Enumeration {
        n_in,
        col_index,
        n_cols,
        table,
        log_z: z.ln() + top,
        weights,
    })
}

/// Inner-block weights for fixed outer fields. With `log_domain` the row
/// holds log-weights built from raw energies, otherwise weights relative to
/// `exp(max_in + sum |F_i|)` built from the pre-scaled inner table, and the
/// return value is their sum.
fn fill_row(row: &mut [f64], field_in: &[f64], inner: &[f64], log_domain: bool) -> f64 {
    row[0] = if log_domain { 0.0 } else { 1.0 };
    let mut len = 1;
    for f in field_in {
        if log_domain {
            for a in 0..len {
                let v = row[a];
                row[a] = v + f - f.abs();
                row[a + len] = v - f - f.abs();
            }
        } else {
            let plus = (f - f.abs()).exp();
            let minus = (-f - f.abs()).exp();
            for a in 0..len {
                let v = row[a];
                row[a] = v * plus;
                row[a + len] = v * minus;
            }
        }
        len *= 2;
    }
    let mut sum = 0.0;
    if log_domain {
        for (r, x) in row.iter_mut().zip(inner) {
            *r += x;
        }
    } else {
        for (r, x) in row.iter_mut().zip(inner) {
            *r *= x;
            sum += *r;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_transform_matches_columns() {
        let width = 3;
        let data: Vec<f64> = (0..8 * width).map(|i| ((i * 7) % 11) as f64).collect();
        let mut t = data.clone();
        fwht_rows(&mut t, width);
        for c in 0..width {
            let mut col: Vec<f64> = (0..8).map(|r| data[r * width + c]).collect();
            fwht(&mut col);
            for r in 0..8 {
                assert_eq!(t[r * width + c], col[r]);
            }
        }
    }

    #[test]
    fn fwht_small() {
        let mut v = vec![1.0, 2.0, 3.0, 4.0];
        fwht(&mut v);
        assert_eq!(v, vec![10.0, -2.0, -4.0, 0.0]);
        let x: Vec<f64> = (0..16).map(|i| (i * i % 7) as f64 - 2.5).collect();
        let mut y = x.clone();
        fwht(&mut y);
        for (k, yk) in y.iter().enumerate() {
            let direct: f64 = x
                .iter()
                .enumerate()
                .map(|(i, xi)| if (i & k).count_ones() % 2 == 0 { *xi } else { -xi })
                .sum();
            assert_eq!(*yk, direct);
        }
    }
}
