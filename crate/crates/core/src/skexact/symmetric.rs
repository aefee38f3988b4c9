//! Dense storage of fully symmetric tensors, evaluated once per sorted index
//! tuple.

const PERMS3: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

pub(crate) fn symmetric3(n: usize, f: impl Fn(usize, usize, usize) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; n * n * n];
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                let v = f(i, j, k);
                let idx = [i, j, k];
                for p in PERMS3 {
                    out[(idx[p[0]] * n + idx[p[1]]) * n + idx[p[2]]] = v;
                }
            }
        }
    }
    out
}

pub(crate) fn symmetric4(n: usize, f: impl Fn(usize, usize, usize, usize) -> f64) -> Vec<f64> {
    let mut perms = Vec::with_capacity(24);
    for a in 0..4 {
        for b in (0..4).filter(|&b| b != a) {
            for c in (0..4).filter(|&c| c != a && c != b) {
                perms.push([a, b, c, 6 - a - b - c]);
            }
        }
    }
    let mut out = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                for l in k..n {
                    let v = f(i, j, k, l);
                    let idx = [i, j, k, l];
                    for p in &perms {
                        out[((idx[p[0]] * n + idx[p[1]]) * n + idx[p[2]]) * n + idx[p[3]]] = v;
                    }
                }
            }
        }
    }
    out
}
