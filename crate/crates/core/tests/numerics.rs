// elimination loops update row pairs by index
#![allow(clippy::needless_range_loop)]

use distrl::column::{solve_column, ColumnSpec, SolveStatus, SolverOptions};
use distrl::stream::Stream;
use distrl::thermo::{ComponentBank, KELVIN};
use distrl::tridiag;
use proptest::prelude::*;

/// Dense Gaussian elimination with partial pivoting.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

fn dominant_system() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
    (2usize..40).prop_flat_map(|n| {
        (
            prop::collection::vec(-1.0..1.0f64, n - 1),
            prop::collection::vec(-1.0..1.0f64, n - 1),
            prop::collection::vec(0.5..3.0f64, n),
            prop::collection::vec(-10.0..10.0f64, n),
            prop::collection::vec(any::<bool>(), n),
        )
            .prop_map(|(sub, sup, margin, rhs, neg)| {
                let n = rhs.len();
                let diag = (0..n)
                    .map(|i| {
                        let off = if i > 0 { sub[i - 1].abs() } else { 0.0 }
                            + if i + 1 < n { sup[i].abs() } else { 0.0 };
                        let d = off + margin[i];
                        if neg[i] {
                            -d
                        } else {
                            d
                        }
                    })
                    .collect();
                (sub, diag, sup, rhs)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn thomas_matches_dense((sub, diag, sup, rhs) in dominant_system()) {
        let n = diag.len();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = diag[i];
            if i > 0 {
                a[i][i - 1] = sub[i - 1];
            }
            if i + 1 < n {
                a[i][i + 1] = sup[i];
            }
        }
        let x = tridiag::solve(&sub, &diag, &sup, &rhs).unwrap();
        let oracle = dense_solve(a, rhs);
        for (u, v) in x.iter().zip(&oracle) {
            prop_assert!((u - v).abs() <= 1e-8 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn bubble_point_matches_bisection(
        w in prop::collection::vec(0.01..1.0f64, 6),
        p in 1.0..30.0f64,
    ) {
        let bank = ComponentBank::default();
        let s: f64 = w.iter().sum();
        let x: Vec<f64> = w.iter().map(|v| v / s).collect();
        let t = bank.bubble_point(&x, p).unwrap();
        let oracle = bisect(|t| {
            x.iter()
                .zip(bank.components())
                .map(|(xi, c)| xi * c.k_value(t, p).unwrap())
                .sum::<f64>()
                - 1.0
        });
        prop_assert!((t - oracle).abs() < 1e-6, "{t} vs {oracle}");
        let td = bank.dew_point(&x, p).unwrap();
        let dew = bisect(|t| {
            1.0 - x
                .iter()
                .zip(bank.components())
                .map(|(yi, c)| yi / c.k_value(t, p).unwrap())
                .sum::<f64>()
        });
        prop_assert!((td - dew).abs() < 1e-6, "{td} vs {dew}");
        prop_assert!(td >= t);
    }
}

/// Root of an increasing function on [150, 500] K.
fn bisect(f: impl Fn(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (150.0, 500.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn pure_component_bubble_equals_dew() {
    let bank = ComponentBank::default();
    let mut x = vec![0.0; bank.len()];
    x[1] = 1.0;
    let tb = bank.bubble_point(&x, 10.0).unwrap();
    let td = bank.dew_point(&x, 10.0).unwrap();
    assert!((tb - td).abs() < 1e-8);
    // psat(T) = P at the pure boiling point
    assert!((bank.get(1).psat(tb) - 10.0).abs() < 1e-8);
}

#[test]
fn propane_product_bubble_point_at_column_pressure() {
    // ethane, propane, isobutane, n-butane, pentanes
    let bank = ComponentBank::default();
    let x = [0.001, 0.950, 0.046, 0.002, 0.0, 0.0];
    let s: f64 = x.iter().sum();
    let x: Vec<f64> = x.iter().map(|v| v / s).collect();
    let t = bank.bubble_point(&x, 17.2).unwrap() - KELVIN;
    assert!((t - 51.6).abs() <= 3.0, "bubble point {t:.2} degC");
}

fn feed() -> Stream {
    let z = [0.06, 33.69, 35.65, 15.32, 10.21, 5.13];
    let s: f64 = z.iter().sum();
    Stream::new(z.iter().map(|v| v / s).collect(), 12_400.0, 105.0, 17.0)
}

fn solve(spec: ColumnSpec) -> distrl::column::ColumnSolution {
    solve_column(
        &ComponentBank::default(),
        &feed(),
        &spec,
        &SolverOptions::default(),
    )
    .unwrap()
}

#[test]
fn more_reflux_purifies_the_distillate() {
    let df = 0.35;
    let purity = |rr: f64| {
        let spec = ColumnSpec::new(30, 15, 17.2, rr, ColumnSpec::boilup_for(df, rr)).unwrap();
        let sol = solve(spec);
        assert_eq!(sol.status, SolveStatus::Converged);
        sol.distillate.composition[1]
    };
    let p: Vec<f64> = [1.0, 2.0, 4.0, 8.0].iter().map(|&rr| purity(rr)).collect();
    assert!(p.windows(2).all(|w| w[1] > w[0]), "{p:?}");
}

#[test]
fn more_stages_purify_the_distillate() {
    let purity = |n: usize| {
        let spec = ColumnSpec::new(n, n / 2, 17.2, 2.0, ColumnSpec::boilup_for(0.35, 2.0)).unwrap();
        solve(spec).distillate.composition[1]
    };
    assert!(purity(40) > purity(20));
}

#[test]
fn products_follow_the_cmo_split() {
    let spec = ColumnSpec::new(40, 20, 10.0, 3.0, 2.5).unwrap();
    let sol = solve(spec);
    let d = spec.distillate_fraction() * 12_400.0;
    assert!((sol.distillate.flow - d).abs() < 1e-6 * d);
    assert!((sol.bottoms.flow - (12_400.0 - d)).abs() < 1e-6 * d);
    // condenser at the distillate bubble point, reboiler above it
    assert!(sol.q_cnd < 0.0 && sol.q_rbl > 0.0);
    assert!(sol.bottoms.temperature > sol.distillate.temperature);
}
