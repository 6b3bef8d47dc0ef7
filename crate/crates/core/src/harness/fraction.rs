//! Fixed-category sweep over the taxpayer fraction on the complete graph.

use crate::error::{Error, Result};
use crate::params::{Category, Params};
use crate::sim::InitialFractions;

use super::{run_batch, run_replica, Summary, SweepCurve, SweepPoint};

/// Interpolated zero crossing with an approximate 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub value: f64,
    pub half_width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThresholdReport {
    /// Taxpayer zero crossing after rescaling.
    pub f_th: Option<Threshold>,
    /// Evaders turn positive (unrescaled).
    pub a: Option<Threshold>,
    /// The collective turns positive (unrescaled).
    pub b: Option<Threshold>,
    /// Taxpayers turn positive (unrescaled).
    pub c: Option<Threshold>,
}

impl ThresholdReport {
    /// Named entries in report order.
    pub fn entries(&self) -> [(&'static str, Option<Threshold>); 4] {
        [("f_th", self.f_th), ("a", self.a), ("b", self.b), ("c", self.c)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FractionSweep {
    /// Rescaled when requested.
    pub curve: SweepCurve,
    pub thresholds: ThresholdReport,
    pub rescaled: bool,
    /// Mean overall capital of the all-evader community, the rescaling offset.
    pub baseline: f64,
}

/// First upward zero crossing of `ys` over `xs`, linearly interpolated.
///
/// Points without a mean are skipped. The half-width propagates twice the
/// larger standard error of the two bracketing points through the local slope.
pub fn zero_crossing(xs: &[f64], ys: &[Summary]) -> Option<Threshold> {
    let pts: Vec<(f64, f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter_map(|(&x, s)| s.mean.map(|m| (x, m, s.se().unwrap_or(0.0))))
        .collect();
    pts.windows(2).find_map(|w| {
        let (x0, y0, e0) = w[0];
        let (x1, y1, e1) = w[1];
        if y0 < 0.0 && y1 >= 0.0 {
            let slope = (y1 - y0) / (x1 - x0);
            Some(Threshold {
                value: x0 - y0 / slope,
                half_width: 2.0 * e0.max(e1) / slope,
            })
        } else {
            None
        }
    })
}

/// Runs `replicas` fixed-category simulations at every `f = k / steps`,
/// `k = 0..=steps`, on the complete graph.
pub fn sweep_fraction(
    params: &Params,
    rescale: bool,
    replicas: usize,
    steps: usize,
) -> Result<FractionSweep> {
    let params = params.clone().validate()?;
    if replicas == 0 || steps == 0 {
        return Err(Error::InvalidParam {
            name: if replicas == 0 { "replicas" } else { "steps" },
            value: "0".into(),
            constraint: ">=1",
        });
    }
    let grid: Vec<f64> = (0..=steps).map(|k| k as f64 / steps as f64).collect();
    let jobs: Vec<_> = grid
        .iter()
        .enumerate()
        .map(|(k, &f)| {
            let params = &params;
            move |r| run_replica(params, InitialFractions::taxpayers_only(f)?, None, k, r)
        })
        .collect();
    let runs = run_batch(&jobs, replicas)?;

    let raw = SweepCurve {
        variable: "f".into(),
        points: grid
            .iter()
            .zip(&runs)
            .map(|(&f, rs)| SweepPoint::from_runs(f, rs))
            .collect(),
        replicas,
    };
    let baseline = raw.points[0].avg_capital_all.mean.unwrap_or(0.0);
    let rescaled = rescale_curve(&raw, baseline);

    let column = |curve: &SweepCurve, pick: &dyn Fn(&SweepPoint) -> Summary| -> Vec<Summary> {
        curve.points.iter().map(pick).collect()
    };
    let thresholds = ThresholdReport {
        f_th: zero_crossing(&grid, &column(&rescaled, &|p| *p.capital(Category::Taxpayer))),
        a: zero_crossing(&grid, &column(&raw, &|p| *p.capital(Category::Evader))),
        b: zero_crossing(&grid, &column(&raw, &|p| p.avg_capital_all)),
        c: zero_crossing(&grid, &column(&raw, &|p| *p.capital(Category::Taxpayer))),
    };
    Ok(FractionSweep {
        curve: if rescale { rescaled } else { raw },
        thresholds,
        rescaled: rescale,
        baseline,
    })
}

fn rescale_curve(curve: &SweepCurve, offset: f64) -> SweepCurve {
    let mut out = curve.clone();
    for p in &mut out.points {
        p.avg_capital_all = p.avg_capital_all.shifted(offset);
        for s in &mut p.avg_capital {
            *s = s.shifted(offset);
        }
    }
    out
}

/// Quadrant of the adapted Cipolla diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CipollaLabel {
    Smart,
    Naive,
    Bandit,
    Stupid,
}

/// Taxpayers are smart at or above `c`, naive below; evaders are bandits at
/// or above `a`, stupid below.
pub fn classify_cipolla(category: Category, f: f64, a: f64, c: f64) -> Result<CipollaLabel> {
    match category {
        Category::Taxpayer if f >= c => Ok(CipollaLabel::Smart),
        Category::Taxpayer => Ok(CipollaLabel::Naive),
        Category::Evader if f >= a => Ok(CipollaLabel::Bandit),
        Category::Evader => Ok(CipollaLabel::Stupid),
        Category::Mixed => Err(Error::MixedNotClassifiable),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(mean: f64, sd: f64, count: usize) -> Summary {
        Summary {
            mean: Some(mean),
            sd: Some(sd),
            count,
        }
    }

    #[test]
    fn crossing_is_interpolated() {
        let xs = [0.0, 0.1, 0.2, 0.3];
        let ys = [s(-3.0, 0.0, 4), s(-1.0, 0.0, 4), s(1.0, 2.0, 4), s(2.0, 0.0, 4)];
        let t = zero_crossing(&xs, &ys).unwrap();
        assert!((t.value - 0.15).abs() < 1e-12);
        // se = 1, slope = 20
        assert!((t.half_width - 0.1).abs() < 1e-12);
    }

    #[test]
    fn crossing_skips_missing_and_exact_zero() {
        let missing = Summary::of([None]);
        let xs = [0.0, 0.5, 1.0];
        let t = zero_crossing(&xs, &[missing, s(-1.0, 0.0, 1), s(0.0, 0.0, 1)]).unwrap();
        assert_eq!(t.value, 1.0);
        assert!(zero_crossing(&xs, &[s(1.0, 0.0, 1), s(2.0, 0.0, 1), s(3.0, 0.0, 1)]).is_none());
    }

    #[test]
    fn cipolla_quadrants() {
        use CipollaLabel::*;
        let (a, c) = (0.10, 0.50);
        assert_eq!(classify_cipolla(Category::Evader, 0.05, a, c).unwrap(), Stupid);
        assert_eq!(classify_cipolla(Category::Taxpayer, 0.9, a, c).unwrap(), Smart);
        assert_eq!(classify_cipolla(Category::Evader, 0.30, a, c).unwrap(), Bandit);
        assert_eq!(classify_cipolla(Category::Taxpayer, 0.3, a, c).unwrap(), Naive);
        assert_eq!(classify_cipolla(Category::Taxpayer, c, a, c).unwrap(), Smart);
        assert_eq!(classify_cipolla(Category::Evader, a, a, c).unwrap(), Bandit);
        assert!(matches!(
            classify_cipolla(Category::Mixed, 0.5, a, c),
            Err(Error::MixedNotClassifiable)
        ));
    }

    #[test]
    fn small_sweep_shape() {
        let params = Params {
            n_players: 100,
            seed: 3,
            ..Params::default()
        };
        let sweep = sweep_fraction(&params, false, 3, 10).unwrap();
        assert_eq!(sweep.curve.points.len(), 11);
        let first = &sweep.curve.points[0];
        assert_eq!(first.capital(Category::Taxpayer).mean, None);
        let last = &sweep.curve.points[10];
        assert_eq!(last.capital(Category::Evader).mean, None);
        assert_eq!(last.avg_capital_all.mean, Some(100.0));

        let rescaled = sweep_fraction(&params, true, 3, 10).unwrap();
        assert_eq!(rescaled.curve.points[0].avg_capital_all.mean, Some(0.0));
        assert_eq!(rescaled.thresholds, sweep.thresholds);
        assert_eq!(
            rescaled.curve.points[10].avg_capital_all.mean.unwrap(),
            100.0 - sweep.baseline
        );
    }

    #[test]
    fn sweep_rejects_invalid_params() {
        let params = Params {
            penalty_h: 2,
            ..Params::default()
        };
        assert!(sweep_fraction(&params, false, 1, 10).is_err());
    }
}
