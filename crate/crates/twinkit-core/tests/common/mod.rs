//! Test-support code shared by the integration suites. The naive energy
//! estimators here are written as literal double loops straight from the
//! formulas and stay independent of the production summation path.

#![allow(dead_code)]

use twinkit_core::Dataset;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn double_sum(data: &Dataset, rows_a: &[usize], rows_b: &[usize]) -> f64 {
    let mut s = 0.0;
    for &i in rows_a {
        for &j in rows_b {
            s += dist(data.row(i), data.row(j));
        }
    }
    s
}

pub fn naive_energy_full(subset: &[usize], data: &Dataset) -> f64 {
    let all: Vec<usize> = (0..data.n_rows()).collect();
    let n = subset.len() as f64;
    let big_n = data.n_rows() as f64;
    2.0 / (n * big_n) * double_sum(data, subset, &all)
        - double_sum(data, subset, subset) / (n * n)
        - double_sum(data, &all, &all) / (big_n * big_n)
}

pub fn naive_energy_between(part_a: &[usize], part_b: &[usize], data: &Dataset) -> f64 {
    let n = part_a.len() as f64;
    let m = part_b.len() as f64;
    2.0 / (n * m) * double_sum(data, part_a, part_b)
        - double_sum(data, part_a, part_a) / (n * n)
        - double_sum(data, part_b, part_b) / (m * m)
}

pub fn naive_energy_plot_metric(subset: &[usize], data: &Dataset) -> f64 {
    let all: Vec<usize> = (0..data.n_rows()).collect();
    let n = subset.len() as f64;
    let big_n = data.n_rows() as f64;
    2.0 / (n * big_n) * double_sum(data, subset, &all) - double_sum(data, subset, subset) / (n * n)
}

pub fn relative_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}
