//! Two-coefficient scaling laws fitted by least squares and compared on a
//! held-out point.
//!
//! * linear: `y = a + b·n`, ordinary least squares
//! * power: `y = a·n^b`, least squares on `(ln n, ln y)`
//! * exponential: `y = a·e^(b·n)`, least squares on `(n, ln y)`

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Linear,
    Power,
    Exponential,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Linear, Family::Power, Family::Exponential];

    /// Linear and power laws are both polynomial growth.
    pub fn growth(self) -> Growth {
        match self {
            Family::Linear | Family::Power => Growth::Polynomial,
            Family::Exponential => Growth::Exponential,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Linear => "linear",
            Family::Power => "power",
            Family::Exponential => "exponential",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Growth {
    Polynomial,
    Exponential,
}

impl fmt::Display for Growth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Growth::Polynomial => "polynomial",
            Growth::Exponential => "exponential",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitModel {
    pub family: Family,
    pub a: f64,
    pub b: f64,
    /// Sum of squared residuals in the original `y` space.
    pub sse: f64,
}

// Returns (intercept, slope).
fn least_squares(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 || !sxx.is_finite() {
        return Err(Error::Fit("predictor values are degenerate".into()));
    }
    let slope = sxy / sxx;
    Ok((my - slope * mx, slope))
}

pub fn fit_curve(family: Family, points: &[(f64, f64)]) -> Result<FitModel> {
    if points.len() < 2 {
        return Err(Error::Fit(format!("need at least 2 points, got {}", points.len())));
    }
    if points.iter().any(|(n, y)| !n.is_finite() || !y.is_finite()) {
        return Err(Error::Fit("non-finite point".into()));
    }
    // Sorting makes the result independent of input order, bit for bit.
    let mut pts = points.to_vec();
    pts.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));
    if pts.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::Fit("qubit counts must be distinct".into()));
    }
    let ns: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    if family != Family::Linear && ys.iter().any(|&y| y <= 0.0) {
        return Err(Error::Fit(format!("{family} fit needs positive y values")));
    }
    let (a, b) = match family {
        Family::Linear => least_squares(&ns, &ys)?,
        Family::Power => {
            if ns.iter().any(|&n| n <= 0.0) {
                return Err(Error::Fit("power fit needs positive n".into()));
            }
            let lx: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
            let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
            let (c, b) = least_squares(&lx, &ly)?;
            (c.exp(), b)
        }
        Family::Exponential => {
            let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
            let (c, b) = least_squares(&ns, &ly)?;
            (c.exp(), b)
        }
    };
    let mut model = FitModel { family, a, b, sse: 0.0 };
    model.sse = pts.iter().map(|&(n, y)| (predict(&model, n) - y).powi(2)).sum();
    Ok(model)
}

pub fn predict(model: &FitModel, n: f64) -> f64 {
    match model.family {
        Family::Linear => model.a + model.b * n,
        Family::Power => model.a * n.powf(model.b),
        Family::Exponential => model.a * (model.b * n).exp(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutError {
    pub family: Family,
    pub predicted: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub selected: Family,
    pub growth: Growth,
    pub holdout: (f64, f64),
    pub errors: Vec<HoldoutError>,
}

/// Picks the model whose prediction at the held-out `n` lands closest to the
/// observed `y`; the first model wins ties.
pub fn select_family(models: &[FitModel], holdout: (f64, f64)) -> Result<Selection> {
    if models.is_empty() {
        return Err(Error::Empty("no models to select from"));
    }
    let errors: Vec<HoldoutError> = models
        .iter()
        .map(|m| {
            let predicted = predict(m, holdout.0);
            HoldoutError {
                family: m.family,
                predicted,
                abs_error: (predicted - holdout.1).abs(),
            }
        })
        .collect();
    let best = errors
        .iter()
        .fold(None::<&HoldoutError>, |best, e| match best {
            Some(b) if e.abs_error < b.abs_error => Some(e),
            Some(b) => Some(b),
            None => Some(e),
        })
        .expect("non-empty");
    Ok(Selection {
        selected: best.family,
        growth: best.family.growth(),
        holdout,
        errors,
    })
}

/// Fits every family to `points`.
pub fn fit_all(points: &[(f64, f64)]) -> Result<Vec<FitModel>> {
    Family::ALL.iter().map(|&f| fit_curve(f, points)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::E;

    #[test]
    fn exact_line() {
        let m = fit_curve(Family::Linear, &[(1.0, 2.0), (2.0, 3.0), (3.0, 4.0)]).unwrap();
        assert!((m.a - 1.0).abs() < 1e-12 && (m.b - 1.0).abs() < 1e-12);
        assert!(m.sse < 1e-20);
        assert!((predict(&m, 4.0) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn exact_power_law() {
        let m = fit_curve(Family::Power, &[(1.0, 3.0), (2.0, 12.0), (3.0, 27.0)]).unwrap();
        assert!((m.a - 3.0).abs() < 1e-9 && (m.b - 2.0).abs() < 1e-9);
        assert!((predict(&m, 4.0) - 48.0).abs() < 1e-8);
    }

    #[test]
    fn exact_exponential() {
        let m = fit_curve(
            Family::Exponential,
            &[(1.0, 2.0 * E), (2.0, 2.0 * E * E), (3.0, 2.0 * E.powi(3))],
        )
        .unwrap();
        assert!((m.a - 2.0).abs() < 1e-9 && (m.b - 1.0).abs() < 1e-9);
        assert!((predict(&m, 4.0) - 109.196).abs() < 1e-3);
    }

    #[test]
    fn selection_on_holdout() {
        let power = [(1.0, 3.0), (2.0, 12.0), (3.0, 27.0)];
        let s = select_family(&fit_all(&power).unwrap(), (4.0, 48.0)).unwrap();
        assert_eq!(s.selected, Family::Power);
        assert_eq!(s.growth, Growth::Polynomial);
        assert_eq!(s.errors.len(), 3);

        let expo: Vec<(f64, f64)> = (1..=3).map(|n| (n as f64, 2.0 * E.powi(n))).collect();
        let s = select_family(&fit_all(&expo).unwrap(), (4.0, 2.0 * E.powi(4))).unwrap();
        assert_eq!(s.selected, Family::Exponential);
        assert_eq!(s.growth, Growth::Exponential);
    }

    #[test]
    fn errors() {
        assert!(fit_curve(Family::Linear, &[(1.0, 1.0)]).is_err());
        assert!(fit_curve(Family::Linear, &[(1.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(fit_curve(Family::Power, &[(1.0, 1.0), (2.0, 0.0)]).is_err());
        assert!(fit_curve(Family::Exponential, &[(1.0, -1.0), (2.0, 1.0)]).is_err());
        assert!(fit_curve(Family::Linear, &[(1.0, -1.0), (2.0, 1.0)]).is_ok());
        assert!(select_family(&[], (4.0, 1.0)).is_err());
    }

    proptest! {
        #[test]
        fn exact_recovery(a in 0.1f64..10.0, b in -1.5f64..2.5, family_index in 0usize..3) {
            let family = Family::ALL[family_index];
            let truth = FitModel { family, a, b, sse: 0.0 };
            let points: Vec<(f64, f64)> = (1..=3).map(|n| (n as f64, predict(&truth, n as f64))).collect();
            let m = fit_curve(family, &points).unwrap();
            prop_assert!((m.a - a).abs() < 1e-9 * a.abs().max(1.0));
            prop_assert!((m.b - b).abs() < 1e-9);
        }

        #[test]
        fn order_invariant(ys in proptest::collection::vec(0.1f64..100.0, 4), rot in 0usize..4) {
            let pts: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, &y)| (i as f64 + 1.0, y)).collect();
            let mut shuffled = pts.clone();
            shuffled.rotate_left(rot);
            shuffled.reverse();
            for f in Family::ALL {
                prop_assert_eq!(fit_curve(f, &pts).unwrap(), fit_curve(f, &shuffled).unwrap());
            }
        }
    }
}
