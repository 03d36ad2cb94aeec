//! Normal velocity in graph form, its quasilinear splitting, and oracles.

use super::bundle::{rests, scalars};
use super::{build_bundle, GraphCurveScene, Jet};
use crate::error::{Error, Result};
use crate::flow::rhs_unscaled;
use crate::spectral::GridFunction;
use crate::support::{support_from_points, IngestMode, SupportGrid};

/// `V = e/a² − 4c/(g·a) − d²/a³ − 2a/g² + 6b²/(g²·a)` at one sample.
pub(crate) fn velocity_at(j: &Jet) -> f64 {
    let [g, a, b, c, d, e] = scalars(j);
    e / (a * a) - 4.0 * c / (g * a) - d * d / (a * a * a) - 2.0 * a / (g * g) + 6.0 * b * b / (g * g * a)
}

fn check_convex(scene: &GraphCurveScene, jets: &[Jet]) -> Result<()> {
    for (j, jet) in jets.iter().enumerate() {
        let a = scalars(jet)[1];
        if !(a > 0.0) {
            return Err(Error::NotLocallyConvex {
                node: j,
                theta: scene.base().u(j),
                margin: a,
            });
        }
    }
    Ok(())
}

/// Normal velocity of the entropy flow along the composite curve.
pub fn velocity_graph(scene: &GraphCurveScene) -> Result<GridFunction> {
    let jets = scene.jets()?;
    check_convex(scene, &jets)?;
    GridFunction::new(scene.base().grid().clone(), jets.iter().map(velocity_at).collect())
}

/// The five pairs `(A_i ρ, F_i)` with `Σ(A_i ρ − F_i) = (|γ_u|/(1 − k₀ρ))·V`.
#[derive(Clone, Debug)]
pub struct OperatorSplit {
    pub a_rho: [Vec<f64>; 5],
    pub f: [Vec<f64>; 5],
    /// `Σ_i (A_i ρ − F_i)`.
    pub total: Vec<f64>,
    /// `(|γ_u|/(1 − k₀ρ))·V`.
    pub target: Vec<f64>,
    /// `max|total − target| / max|target|`.
    pub residual: f64,
}

/// `(A_i ρ, F_i)` for `i = 1..=5` at one sample.
pub(crate) fn pairs_at(j: &Jet) -> [(f64, f64); 5] {
    let Jet { k, k1, r, r1, r2, r3, r4, .. } = *j;
    let w = j.w();
    let [g, a, ..] = scalars(j);
    let (rest1, rest2, rest3) = rests(j);
    let (g2, g3, a2, a3) = (g * g, g * g * g, a * a, a * a * a);
    let m = k1 * r + k * r1;
    [
        (
            (w * r4 + 4.0 * k * r1 * r3 + (6.0 * k1 * r1 - 6.0 * k * k * w) * r2) / (w * a2),
            -rest1 / (w * a2),
        ),
        (
            (-4.0 * r1 * r3 + 12.0 * k * w * r2) / (w * g * a),
            4.0 * rest2 / (w * g * a),
        ),
        (
            -(w * w * r3 + 2.0 * w * (3.0 * k * r1 * r2 + rest3)) * r3 / (w * g * a3)
                - (9.0 * k * k * r1 * r1 * r2 + 6.0 * k * r1 * rest3) * r2 / (w * g * a3),
            rest3 * rest3 / (w * g * a3),
        ),
        (
            2.0 * (-r2 / g2 - (k1 * r + 2.0 * k * r1) * r1 / (w * g2)),
            2.0 * k * w / g2,
        ),
        (
            (6.0 * r1 * r1 * r2 - 12.0 * m * r1 * w) * r2 / (w * g3 * a),
            -6.0 * m * m * w / (g3 * a),
        ),
    ]
}

/// Evaluates the quasilinear splitting termwise and checks it against [`velocity_graph`].
pub fn operator_split(scene: &GraphCurveScene) -> Result<OperatorSplit> {
    let jets = scene.jets()?;
    check_convex(scene, &jets)?;
    let n = jets.len();
    let mut a_rho: [Vec<f64>; 5] = Default::default();
    let mut f: [Vec<f64>; 5] = Default::default();
    let mut total = Vec::with_capacity(n);
    let mut target = Vec::with_capacity(n);
    for jet in &jets {
        let mut sum = 0.0;
        for (i, (ar, fi)) in pairs_at(jet).into_iter().enumerate() {
            a_rho[i].push(ar);
            f[i].push(fi);
            sum += ar - fi;
        }
        total.push(sum);
        target.push(jet.w().hypot(jet.r1) / jet.w() * velocity_at(jet));
    }
    let scale = target.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let err = total.iter().zip(&target).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(OperatorSplit {
        a_rho,
        f,
        total,
        target,
        residual: if scale > 0.0 { err / scale } else { err },
    })
}

/// Support-function velocity `k_θθ + k` of the composite curve at each
/// sample's normal angle.
///
/// The composite points are ingested as an immersed curve on `n_theta` nodes,
/// and the resulting velocity is interpolated at `θ(u) = arg T(u) − π/2`.
pub fn velocity_via_support(scene: &GraphCurveScene, n_theta: usize) -> Result<Vec<f64>> {
    let bundle = build_bundle(scene)?;
    let s = support_from_points(&scene.points(), 1, n_theta, IngestMode::Immersed)?;
    let f = rhs_unscaled(&s)?;
    let thetas: Vec<f64> = bundle
        .tangent
        .iter()
        .map(|t| t.y.atan2(t.x) - std::f64::consts::FRAC_PI_2)
        .collect();
    Ok(f.interpolate(&thetas))
}

/// Compares `k_θθ + k` with `k_ss/k² − k_s²/k³ + k`, where `∂_s = k∂_θ`.
///
/// Returns the maximum nodal difference relative to `max|k_θθ + k|`.
pub fn check_parametrization_identity(s: &SupportGrid) -> Result<f64> {
    let k = s.curvature()?;
    let kt = k.deriv(1)?;
    let ktt = k.deriv(2)?;
    let ks = k.zip_map(&kt, |a, b| a * b)?;
    let kss = k.zip_map(&ks.deriv(1)?, |a, b| a * b)?;
    let mut err = 0.0f64;
    let mut scale = 0.0f64;
    for j in 0..s.n() {
        let kv = k.values()[j];
        let lhs = ktt.values()[j] + kv;
        let rhs = kss.values()[j] / (kv * kv) - ks.values()[j].powi(2) / kv.powi(3) + kv;
        err = err.max((lhs - rhs).abs());
        scale = scale.max(lhs.abs());
    }
    Ok(err / scale)
}
