//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use levy_tree::measures::HrParams;
use levy_tree::quadrature;
use nalgebra::DMatrix;

/// Λ*₊(y₁ > x₁, y₂ > x₂) by 2-d quadrature of the Hüsler–Reiss density on
/// the log scale, each inner integral centred at the outer variable.
pub fn hr_tail_by_quadrature(gamma: f64, x1: f64, x2: f64) -> f64 {
    let hr = HrParams::new(DMatrix::from_row_slice(2, 2, &[0.0, gamma, gamma, 0.0])).unwrap();
    let (l1, l2) = (x1.ln(), x2.ln());
    quadrature::integrate_from(
        |z1| {
            // Inner variable u = z2 − z1 ranges over (l2 − z1, ∞).
            quadrature::integrate_from(
                |u| {
                    let y = [z1.exp(), (z1 + u).exp()];
                    if !(y.iter().all(|v| *v > 0.0 && v.is_finite())) {
                        return 0.0;
                    }
                    hr.density(&y).unwrap() * y[0] * y[1]
                },
                l2 - z1,
                1e-17,
                1e-12,
            )
            .unwrap()
            .value
        },
        l1,
        1e-15,
        1e-11,
    )
    .unwrap()
    .value
}

/// Λ*₊(y > x componentwise) in three dimensions by nested quadrature.
pub fn hr_tail3_by_quadrature(hr: &HrParams, x: f64) -> f64 {
    let l = x.ln();
    quadrature::integrate_from(
        |z0| {
            quadrature::integrate_from(
                |u1| {
                    quadrature::integrate_from(
                        |u2| {
                            let y = [z0.exp(), (z0 + u1).exp(), (z0 + u2).exp()];
                            if !(y.iter().all(|v| *v > 0.0 && v.is_finite())) {
                                return 0.0;
                            }
                            hr.density(&y).unwrap() * y[0] * y[1] * y[2]
                        },
                        l - z0,
                        1e-16,
                        1e-10,
                    )
                    .unwrap()
                    .value
                },
                l - z0,
                1e-15,
                1e-10,
            )
            .unwrap()
            .value
        },
        l,
        1e-14,
        1e-9,
    )
    .unwrap()
    .value
}

/// Two-sample Kolmogorov–Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    let mut p = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = 2.0 * (-2.0 * kf * kf * lambda * lambda).exp();
        p += if k % 2 == 1 { term } else { -term };
    }
    (d, p.clamp(0.0, 1.0))
}

/// All spanning trees of K_d as sorted 0-based edge lists, by checking every
/// (d − 1)-subset of the complete graph for acyclicity.
pub fn all_spanning_trees(d: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|i| ((i + 1)..d).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        r
    }
    fn rec(
        pairs: &[(usize, usize)],
        start: usize,
        need: usize,
        d: usize,
        chosen: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if chosen.len() == need {
            let mut p: Vec<usize> = (0..d).collect();
            for &(a, b) in chosen.iter() {
                let (ra, rb) = (find(&mut p, a), find(&mut p, b));
                if ra == rb {
                    return;
                }
                p[ra] = rb;
            }
            out.push(chosen.clone());
            return;
        }
        for k in start..pairs.len() {
            if pairs.len() - k < need - chosen.len() {
                break;
            }
            chosen.push(pairs[k]);
            rec(pairs, k + 1, need, d, chosen, out);
            chosen.pop();
        }
    }
    rec(&pairs, 0, d - 1, d, &mut chosen, &mut out);
    out
}

/// Four-point condition: for every quadruple the two largest of the three
/// pair sums agree.
pub fn four_point_holds(g: &DMatrix<f64>, tol: f64) -> bool {
    let d = g.nrows();
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    let mut s = [
                        g[(a, b)] + g[(c, e)],
                        g[(a, c)] + g[(b, e)],
                        g[(a, e)] + g[(b, c)],
                    ];
                    s.sort_by(f64::total_cmp);
                    if (s[2] - s[1]).abs() > tol {
                        return false;
                    }
                }
            }
        }
    }
    true
}
