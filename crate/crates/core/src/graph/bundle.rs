//! Closed-form derivatives of the composite curve.

use indexmap::IndexMap;

use super::{GraphCurveScene, Jet};
use crate::error::Result;
use crate::geom::Vec2;
use crate::spectral::GridFunction;

/// Relative level below which modes of the sampled composite curve are
/// discarded before direct differentiation.
pub const DIRECT_DENOISE: f64 = 1e-15;

/// Names of the bundle entries compared against direct differentiation.
pub const BUNDLE_ENTRIES: [&str; 14] = [
    "gamma_u",
    "gamma_uu",
    "gamma_u3",
    "gamma_u4",
    "tangent",
    "normal",
    "uu_n",
    "uu_t",
    "uu_perp_sq",
    "uu_tan_sq",
    "u3_t",
    "u3_n",
    "u3_perp_sq",
    "u4_n",
];

/// Derivatives of `γ = γ₀ − ρν₀` and their projections on the composite frame.
///
/// `N = T^⊥` is the inner normal of the composite curve. Scalars are
/// `uu_n = ⟨γ_uu, N⟩`, `uu_t = ⟨γ_uu, T⟩`, `u3_t = ⟨γ_u³, T⟩`,
/// `u3_n = ⟨γ_u³, N⟩` and `u4_n = ⟨γ_u⁴, N⟩`.
#[derive(Clone, Debug)]
pub struct DerivativeBundle {
    pub gamma_u: Vec<Vec2>,
    pub gamma_uu: Vec<Vec2>,
    pub gamma_u3: Vec<Vec2>,
    pub gamma_u4: Vec<Vec2>,
    pub tangent: Vec<Vec2>,
    pub normal: Vec<Vec2>,
    pub speed: Vec<f64>,
    pub uu_n: Vec<f64>,
    pub uu_t: Vec<f64>,
    pub uu_perp_sq: Vec<f64>,
    pub uu_tan_sq: Vec<f64>,
    pub u3_t: Vec<f64>,
    pub u3_n: Vec<f64>,
    pub u3_perp_sq: Vec<f64>,
    pub u4_n: Vec<f64>,
    /// `max|closed form − direct|` per entry of [`BUNDLE_ENTRIES`], relative to
    /// `max|γ_{u^p}|` of the direct vector the entry derives from (squared for
    /// squared projections).
    pub direct_residuals: IndexMap<String, f64>,
}

/// `(T₀, N₀)` components of `γ_u, …, γ_u⁴`.
pub(crate) fn frame_components(j: &Jet) -> [(f64, f64); 4] {
    let Jet { k, k1, k2, k3, r, r1, r2, r3, r4 } = *j;
    let w = j.w();
    let k_sq = k * k;
    [
        (w, r1),
        (-(k1 * r + 2.0 * k * r1), r2 + k * w),
        (
            -(3.0 * k * r2 + 3.0 * k1 * r1 + k_sq * w + k2 * r),
            r3 - 3.0 * k_sq * r1 - 3.0 * k * k1 * r + k1,
        ),
        (
            4.0 * k_sq * k * r1 + 6.0 * k_sq * k1 * r - 3.0 * k * k1 - 4.0 * k * r3 - 6.0 * k1 * r2 - k3 * r
                - 4.0 * k2 * r1,
            r4 - 6.0 * k_sq * r2 - 12.0 * k * k1 * r1 + (k2 - k_sq * k) * w - 3.0 * k1 * k1 * r
                - 3.0 * k * k2 * r,
        ),
    ]
}

/// Lower-order remainders of `g·e`, `g·c` and `g·d`.
pub(crate) fn rests(j: &Jet) -> (f64, f64, f64) {
    let Jet { k, k1, k2, k3, r, r1, .. } = *j;
    let w = j.w();
    let k_sq = k * k;
    let rest1 = -12.0 * k * k1 * r1 * w + 4.0 * (k2 - k_sq * k) * r1 * r1 - 6.0 * k_sq * k1 * r * r1
        + 3.0 * k * k1 * r1
        + k3 * r * r1
        + (k2 - k_sq * k) * w * w
        - 3.0 * k1 * k1 * r * w
        - 3.0 * k * k2 * r * w;
    let rest2 = -3.0 * k_sq * r1 * r1 - 3.0 * k * k1 * r * r1 + k1 * r1 - 3.0 * k1 * r1 * w - k2 * r * w
        - k_sq * w * w;
    let rest3 = -2.0 * k_sq * r1 * w - 3.0 * k * k1 * r * w + k1 * w + 3.0 * k1 * r1 * r1 + k2 * r * r1;
    (rest1, rest2, rest3)
}

/// Composite-frame scalars `(g, a, b, c, d, e)` at one sample.
pub(crate) fn scalars(j: &Jet) -> [f64; 6] {
    let Jet { k, k1, r, r1, r2, r3, r4, .. } = *j;
    let w = j.w();
    let g = w.hypot(r1);
    let (rest1, rest2, rest3) = rests(j);
    let a = (r2 * w + k * w * w + k1 * r * r1 + 2.0 * k * r1 * r1) / g;
    let b = (r1 * r2 - k1 * r * w - k * r1 * w) / g;
    let c = (r1 * r3 - 3.0 * k * r2 * w + rest2) / g;
    let d = (w * r3 + 3.0 * k * r1 * r2 + rest3) / g;
    let e = (w * r4 + 4.0 * k * r1 * r3 + (6.0 * k1 * r1 - 6.0 * k * k * w) * r2 + rest1) / g;
    [g, a, b, c, d, e]
}

/// Evaluates the closed forms and compares them with spectral
/// differentiation of the sampled composite curve.
pub fn build_bundle(scene: &GraphCurveScene) -> Result<DerivativeBundle> {
    let jets = scene.jets()?;
    let n = scene.n();
    let base = scene.base();
    let mut gv: [Vec<Vec2>; 4] = Default::default();
    let mut tangent = Vec::with_capacity(n);
    let mut normal = Vec::with_capacity(n);
    let mut sc: [Vec<f64>; 6] = Default::default();
    for (i, jet) in jets.iter().enumerate() {
        let t0 = base.tangents()[i];
        let n0 = scene.displacement_normal(i);
        for (p, (ct, cn)) in frame_components(jet).into_iter().enumerate() {
            gv[p].push(ct * t0 + cn * n0);
        }
        let t = gv[0][i].normalized();
        tangent.push(t);
        normal.push(t.perp());
        for (dst, v) in sc.iter_mut().zip(scalars(jet)) {
            dst.push(v);
        }
    }
    let [speed, uu_n, uu_t, u3_t, u3_n, u4_n] = sc;
    let sq = |v: &[f64]| v.iter().map(|x| x * x).collect::<Vec<_>>();
    let [gamma_u, gamma_uu, gamma_u3, gamma_u4] = gv;
    let mut bundle = DerivativeBundle {
        uu_perp_sq: sq(&uu_n),
        uu_tan_sq: sq(&uu_t),
        u3_perp_sq: sq(&u3_n),
        gamma_u,
        gamma_uu,
        gamma_u3,
        gamma_u4,
        tangent,
        normal,
        speed,
        uu_n,
        uu_t,
        u3_t,
        u3_n,
        u4_n,
        direct_residuals: IndexMap::new(),
    };
    bundle.direct_residuals = direct_residuals(scene, &bundle)?;
    Ok(bundle)
}

fn direct_residuals(scene: &GraphCurveScene, b: &DerivativeBundle) -> Result<IndexMap<String, f64>> {
    let base = scene.base();
    let pts = scene.points();
    let grid = base.grid().clone();
    // round-off-level modes would otherwise be amplified by ξ⁴
    let x = GridFunction::new(grid.clone(), pts.iter().map(|p| p.x).collect())?;
    let y = GridFunction::new(grid, pts.iter().map(|p| p.y).collect())?;
    let dx = base.u_derivs_denoised(&x, &[1, 2, 3, 4], DIRECT_DENOISE)?;
    let dy = base.u_derivs_denoised(&y, &[1, 2, 3, 4], DIRECT_DENOISE)?;
    let d: Vec<Vec<Vec2>> = dx
        .iter()
        .zip(&dy)
        .map(|(a, c)| a.values().iter().zip(c.values()).map(|(&x, &y)| Vec2::new(x, y)).collect())
        .collect();
    let t: Vec<Vec2> = d[0].iter().map(|v| v.normalized()).collect();
    let nrm: Vec<Vec2> = t.iter().map(|v| v.perp()).collect();
    let proj = |v: &[Vec2], f: &[Vec2]| v.iter().zip(f).map(|(a, b)| a.dot(*b)).collect::<Vec<f64>>();
    let uu_n = proj(&d[1], &nrm);
    let uu_t = proj(&d[1], &t);
    let u3_t = proj(&d[2], &t);
    let u3_n = proj(&d[2], &nrm);
    let u4_n = proj(&d[3], &nrm);
    let sq = |v: &[f64]| v.iter().map(|x| x * x).collect::<Vec<_>>();

    let vec_res = |a: &[Vec2], r: &[Vec2]| {
        let scale = r.iter().map(|v| v.norm()).fold(0.0, f64::max);
        a.iter().zip(r).map(|(p, q)| (*p - *q).norm()).fold(0.0, f64::max) / scale
    };
    // projections are measured against the vector they project
    let peak = |v: &[Vec2]| v.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let sc_res = |a: &[f64], r: &[f64], scale: f64| {
        a.iter().zip(r).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max) / scale
    };
    let (m2, m3, m4) = (peak(&d[1]), peak(&d[2]), peak(&d[3]));
    let values = [
        vec_res(&b.gamma_u, &d[0]),
        vec_res(&b.gamma_uu, &d[1]),
        vec_res(&b.gamma_u3, &d[2]),
        vec_res(&b.gamma_u4, &d[3]),
        vec_res(&b.tangent, &t),
        vec_res(&b.normal, &nrm),
        sc_res(&b.uu_n, &uu_n, m2),
        sc_res(&b.uu_t, &uu_t, m2),
        sc_res(&b.uu_perp_sq, &sq(&uu_n), m2 * m2),
        sc_res(&b.uu_tan_sq, &sq(&uu_t), m2 * m2),
        sc_res(&b.u3_t, &u3_t, m3),
        sc_res(&b.u3_n, &u3_n, m3),
        sc_res(&b.u3_perp_sq, &sq(&u3_n), m3 * m3),
        sc_res(&b.u4_n, &u4_n, m4),
    ];
    Ok(BUNDLE_ENTRIES.iter().map(|s| s.to_string()).zip(values).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{BaseCurve, FrameConvention, RhoSampler};

    #[test]
    fn zero_graph_over_unit_circle() {
        let base = BaseCurve::circle(1.0, 32).unwrap();
        let scene = GraphCurveScene::constant(base, 0.0, FrameConvention::SelfConsistent).unwrap();
        let b = build_bundle(&scene).unwrap();
        for j in 0..32 {
            assert!((b.gamma_uu[j] - b.normal[j]).norm() < 1e-15);
            assert!((b.uu_n[j] - 1.0).abs() < 1e-15);
            assert!(b.uu_t[j].abs() < 1e-15);
            assert!((b.u3_t[j] + 1.0).abs() < 1e-15);
            assert!((b.u4_n[j] + 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_graph_is_concentric_circle() {
        let c = 0.3;
        let base = BaseCurve::circle(1.0, 32).unwrap();
        let scene = GraphCurveScene::constant(base, c, FrameConvention::SelfConsistent).unwrap();
        let b = build_bundle(&scene).unwrap();
        let radius = 1.0 - c;
        for j in 0..32 {
            // speed R, curvature 1/R: ⟨γ_uu, N⟩ = R²·(1/R)
            assert!((b.speed[j] - radius).abs() < 1e-15);
            assert!((b.uu_n[j] - radius).abs() < 1e-15);
        }
    }

    #[test]
    fn frame_components_match_jet_arithmetic() {
        // Oracle: γ(u) = γ₀(u) + ρ(u)N₀(u) differentiated through the Frenet
        // relations T₀' = k₀N₀, N₀' = −k₀T₀ with polynomial-in-u jets.
        let jet = Jet { k: 1.3, k1: -0.4, k2: 0.7, k3: 0.2, r: 0.05, r1: -0.03, r2: 0.2, r3: 0.6, r4: -1.1 };
        let kd = [jet.k, jet.k1, jet.k2, jet.k3];
        let rd = [jet.r, jet.r1, jet.r2, jet.r3, jet.r4];
        // γ' represented as α T₀ + β N₀ with coefficient jets in u.
        // d/du (α T₀ + β N₀) = (α' − k₀β) T₀ + (β' + k₀α) N₀.
        // Truncated Taylor series: index p holds the p-th derivative at u = 0.
        let deg = 5;
        let mul = |a: &[f64], b: &[f64]| -> Vec<f64> {
            (0..deg)
                .map(|p| {
                    (0..=p)
                        .map(|q| binom(p, q) * a.get(q).copied().unwrap_or(0.0) * b.get(p - q).copied().unwrap_or(0.0))
                        .sum()
                })
                .collect()
        };
        let shift = |a: &[f64]| -> Vec<f64> { (0..deg).map(|p| a.get(p + 1).copied().unwrap_or(0.0)).collect() };
        let kj: Vec<f64> = (0..deg).map(|p| kd.get(p).copied().unwrap_or(0.0)).collect();
        let rj: Vec<f64> = rd.to_vec();
        // γ_u = T₀ + ρ' N₀ − k₀ρ T₀
        let kr = mul(&kj, &rj);
        let mut alpha: Vec<f64> = (0..deg).map(|p| if p == 0 { 1.0 } else { 0.0 } - kr[p]).collect();
        let mut beta = shift(&rj);
        let got = frame_components(&jet);
        for (p, &(ct, cn)) in got.iter().enumerate() {
            assert!((alpha[0] - ct).abs() < 1e-12, "order {} T: {} vs {}", p + 1, alpha[0], ct);
            assert!((beta[0] - cn).abs() < 1e-12, "order {} N: {} vs {}", p + 1, beta[0], cn);
            let kb = mul(&kj, &beta);
            let ka = mul(&kj, &alpha);
            let da = shift(&alpha);
            let db = shift(&beta);
            alpha = (0..deg).map(|q| da[q] - kb[q]).collect();
            beta = (0..deg).map(|q| db[q] + ka[q]).collect();
        }
    }

    fn binom(n: usize, k: usize) -> f64 {
        (1..=k).fold(1.0, |acc, i| acc * (n + 1 - i) as f64 / i as f64)
    }

    #[test]
    fn split_of_uu_is_pythagorean() {
        let base = BaseCurve::ellipse(1.4, 1.0, 64).unwrap();
        let scene = RhoSampler::new(3, 4, 0.05 / base.max_curvature())
            .draw(&base, FrameConvention::SelfConsistent)
            .unwrap();
        let b = build_bundle(&scene).unwrap();
        for j in 0..64 {
            let total = b.gamma_uu[j].norm_sqr();
            assert!((b.uu_perp_sq[j] + b.uu_tan_sq[j] - total).abs() <= 1e-10 * total.max(1.0));
        }
    }

    #[test]
    fn bundle_matches_direct_differentiation() {
        for (base, seed) in [
            (BaseCurve::circle(1.0, 256).unwrap(), 11),
            (BaseCurve::ellipse(1.5, 1.0, 256).unwrap(), 12),
        ] {
            let scene = RhoSampler::new(seed, 6, 0.05 / base.max_curvature())
                .draw(&base, FrameConvention::SelfConsistent)
                .unwrap();
            let b = build_bundle(&scene).unwrap();
            for (name, r) in &b.direct_residuals {
                assert!(*r < 1e-8, "{name}: {r:.3e}");
            }
        }
    }

    #[test]
    fn flipped_frame_disagrees_with_direct() {
        let base = BaseCurve::circle(1.0, 64).unwrap();
        let scene = GraphCurveScene::constant(base, 0.5, FrameConvention::Flipped).unwrap();
        let b = build_bundle(&scene).unwrap();
        assert!(b.direct_residuals["uu_n"] > 0.1);
    }
}
