//! Oracles shared by the integration tests. Nothing here calls the
//! library's linear algebra or F-distribution code.

#![allow(dead_code)]

use optdesign::ModelSpec;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

/// Exact determinant by fraction-free elimination.
pub fn int_det(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    let mut a: Vec<Vec<i128>> = m.to_vec();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// Exact rank of an integer matrix.
pub fn int_rank(rows: &[Vec<i128>]) -> usize {
    let mut a: Vec<Vec<i128>> = rows.to_vec();
    let cols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..a.len()).find(|&r| a[r][c] != 0) else {
            continue;
        };
        a.swap(rank, piv);
        for r in rank + 1..a.len() {
            if a[r][c] != 0 {
                let (f, g) = (a[rank][c], a[r][c]);
                for j in 0..cols {
                    a[r][j] = a[r][j] * f - a[rank][j] * g;
                }
                let gcd = a[r].iter().fold(0i128, |acc, &x| gcd(acc, x.abs()));
                if gcd > 1 {
                    a[r].iter_mut().for_each(|x| *x /= gcd);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Model row of an integer point, built straight from the exponent vectors.
pub fn int_row(point: &[i64], model: &ModelSpec) -> Vec<i128> {
    model
        .terms()
        .iter()
        .map(|t| {
            t.iter()
                .zip(point)
                .map(|(&e, &x)| (x as i128).pow(e as u32))
                .product()
        })
        .collect()
}

pub fn int_gram(rows: &[Vec<i128>]) -> Vec<Vec<i128>> {
    let p = rows[0].len();
    let mut g = vec![vec![0i128; p]; p];
    for r in rows {
        for i in 0..p {
            for j in 0..p {
                g[i][j] += r[i] * r[j];
            }
        }
    }
    g
}

pub fn to_int(point: &[f64]) -> Vec<i64> {
    point.iter().map(|&x| x.round() as i64).collect()
}

/// Upper quantile of the F distribution.
pub fn f_upper(prob: f64, df1: u32, df2: u32) -> f64 {
    FisherSnedecor::new(df1 as f64, df2 as f64)
        .unwrap()
        .inverse_cdf(prob)
}

pub fn f_cdf(x: f64, df1: u32, df2: u32) -> f64 {
    FisherSnedecor::new(df1 as f64, df2 as f64).unwrap().cdf(x)
}

/// Every multiset of size `n` drawn from `0..k`, as nondecreasing vectors.
pub fn multisets(k: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(k: usize, n: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in start..k {
            cur.push(i);
            rec(k, n, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, n, 0, &mut Vec::new(), &mut out);
    out
}

/// Runs minus distinct points.
pub fn pedf(refs: &[usize]) -> usize {
    let mut s = refs.to_vec();
    s.sort_unstable();
    s.dedup();
    refs.len() - s.len()
}
