//! Literal transcription of the published closed forms.
//!
//! Several published expressions disagree with direct differentiation. They
//! are kept here verbatim so the disagreement is pinned by tests; the solver
//! uses the corrected forms in the parent module.

use indexmap::IndexMap;

use super::Jet;

/// Published values of the derivative brackets, keyed by entry name.
///
/// `*_t0`/`*_n0` are base-frame components; `*_t`/`*_n` are projections on
/// the composite frame and `*_sq` their squares.
pub fn derivative_entries(j: &Jet) -> IndexMap<&'static str, f64> {
    let Jet { k, k1: ku, k2: kuu, k3: ku3, r, r1: ru, r2: ruu, r3, r4 } = *j;
    let w = j.w();
    let g = w.hypot(ru);
    let (k2, k3, k4) = (k * k, k * k * k, k * k * k * k);
    let mut m = IndexMap::new();
    m.insert("g2_t0", -(ku * r + 2.0 * k * ru));
    m.insert("g2_n0", ruu + k * w);
    m.insert("g2_t", ru * ruu / g - ku * r * w / g - k * ru * w / g);
    m.insert(
        "g2_t_sq",
        (ru * ru * ruu * ruu - 2.0 * ku * r * ru * ruu * w - 2.0 * k * ru * ru * ruu * w
            + ku * ku * r * r * w * w
            + 2.0 * k * ku * r * ru * w * w
            + k2 * ru * ru * w * w)
            / (g * g),
    );
    m.insert("g2_n", ruu * w / g + k * w * w / g + ku * r * ru / g + 2.0 * k * ru * ru / g);
    m.insert(
        "g2_n_sq",
        (ruu * ruu * w * w
            + 2.0 * k * ruu * w.powi(3)
            + 2.0 * ku * r * ru * ruu * w
            + 4.0 * k * ru * ru * ruu * w
            + k2 * w.powi(4)
            + 2.0 * k * ku * r * ru * w * w
            + 4.0 * k2 * ru * ru * w * w
            + ku * ku * r * r * ru * ru
            + 4.0 * k * ku * r * ru.powi(3)
            + 4.0 * k2 * ru.powi(4))
            / (g * g),
    );
    m.insert("g3_t0", -(3.0 * k * ruu + 3.0 * ku * ru + k2 * w + kuu * r));
    m.insert("g3_n0", r3 - 3.0 * k2 * ru - 3.0 * k * ku * r + ku);
    m.insert(
        "g3_t",
        (ru * r3 - 3.0 * k2 * ru * ru - 3.0 * k * ku * r * ru + ku * ru - 3.0 * ku * ru * w - kuu * r * w
            - 3.0 * k * ruu * w * w
            - k2 * w * w)
            / g,
    );
    m.insert(
        "g3_n",
        (r3 * w - 2.0 * k2 * ru * w - 3.0 * k * ku * r * w + ku * w + 3.0 * k * ru * ruu + 3.0 * ku * ru * ru
            + kuu * r * ru * w)
            / g,
    );
    m.insert(
        "g3_n_sq",
        (r3 * r3 * w * w - 4.0 * k2 * ru * r3 * w * w - 6.0 * k * ku * r * r3 * w * w + 2.0 * ku * r3 * w * w
            + 6.0 * k * ru * ruu * r3 * w
            + 6.0 * ku * ru * ru * r3 * w
            + 2.0 * kuu * r * ru * r3 * w * w
            - 12.0 * k3 * ru * ru * ruu * w
            - 18.0 * k2 * ku * r * ru * ruu * w
            + 6.0 * k * ku * ru * ruu * w
            + 9.0 * k2 * ru * ru * ruu * ruu
            + 18.0 * k * ku * ru.powi(3) * ruu
            + 6.0 * k * kuu * r * ru * ru * ruu * w
            + 4.0 * k4 * ru * ru * w * w
            + 12.0 * k3 * ku * r * ru * w * w
            - 4.0 * k2 * ku * ru * w * w
            - 12.0 * k2 * ku * ru.powi(3) * w
            - 4.0 * k2 * kuu * r * ru * ru * w * w
            - 18.0 * k * ku * ku * r * ru * ru * w
            - 6.0 * k * ku * kuu * r * r * ru * w * w
            + 9.0 * ku * ku * ru.powi(4)
            + 6.0 * ku * ku * ru * ru * w
            + 2.0 * ku * kuu * r * ru * w * w
            + 6.0 * ku * kuu * r * ru.powi(3) * w
            + kuu * kuu * r * r * ru * ru * w * w
            + 9.0 * k2 * ku * ku * r * r * w * w
            - 6.0 * k * ku * ku * r * w * w
            + ku * ku * w * w)
            / (g * g),
    );
    m.insert(
        "g4_t0",
        -(4.0 * k * r3 + 6.0 * ku * ruu + 4.0 * kuu * ru - 4.0 * k3 * ru - 4.0 * k2 * ku * r + k * ku + ku3 * r),
    );
    m.insert(
        "g4_n0",
        r4 - 6.0 * k2 * ruu - 12.0 * k * ku * ru + (kuu - k3) * w - 3.0 * ku * ku * r - 3.0 * k * kuu * r,
    );
    m.insert(
        "g4_n",
        (r4 * w + 4.0 * k * ru * r3 - 6.0 * k2 * ruu * w + 6.0 * ku * ru * ruu - 12.0 * k * ku * ru * w
            + 4.0 * (kuu - k3) * ru * ru
            - 4.0 * k2 * ku * r * ru
            + k * ku * ru
            + ku3 * r * ru
            + (kuu - k3) * w * w
            - 3.0 * ku * ku * r * w
            - 3.0 * k * kuu * r * w)
            / g,
    );
    m
}

/// Published five-term velocity, whose fourth term is `−a/g²`.
pub fn velocity(j: &Jet) -> f64 {
    let [g, a, b, c, d, e] = super::bundle::scalars(j);
    e / (a * a) - 4.0 * c / (g * a) - d * d / (a * a * a) - a / (g * g) + 6.0 * b * b / (g * g * a)
}

/// Published pairs, each as the combined value `A_i ρ − F_i`.
pub fn pair_totals(j: &Jet) -> [f64; 5] {
    let Jet { k, k1: kk1, k2: kk2, k3: kk3, r, r1, r2, r3, r4 } = *j;
    let w = j.w();
    let [g, a, ..] = super::bundle::scalars(j);
    let q = a * a;
    let ga = g * a;
    let d3 = g * q * a;
    let g3a = g * g * g * a;
    let p1 = r4 / q + 4.0 * k * r1 / (w * q) * r3 + (-6.0 * k * k / q + 6.0 * kk1 * r1 / (w * q)) * r2
        - (12.0 * k * kk1 * r1 / q - 4.0 * (kk2 - k.powi(3)) * w / q + 4.0 * k * k * kk1 * r * r1 / (w * q)
            - k * kk1 * r1 / (w * q)
            - kk3 * r * r1 / (w * q)
            - (kk2 - k.powi(3)) * w / q
            + 3.0 * kk1 * kk1 * r / q
            + 3.0 * k * kk2 * r / q);
    let p2 = -4.0 * r1 / (w * a) * r3 + 12.0 * k * w / ga * r2
        - (-12.0 * k * k * r1 / (w * ga) - 12.0 * k * kk1 * r * r1 / (w * ga) + 4.0 * kk1 * r1 / (w * ga)
            - 12.0 * kk1 * r1 / ga
            - 4.0 * kk2 * r / ga
            - 4.0 * k * k * w / ga);
    let p3 = (-w / d3 + 4.0 * k * k * r1 * w * w / d3) * r3
        + (6.0 * k * kk1 * r * w / d3 - 2.0 * kk1 * w / d3) * r3
        + (-6.0 * k * r1 * r2 / d3 - 6.0 * kk1 * r1 * r1 / d3) * r3
        - 2.0 * kk2 * r * r1 * w / d3 * r3
        + (12.0 * k.powi(3) * r1 * r1 / d3 + 18.0 * k * k * kk1 * r * r1 / d3) * r2
        + (-6.0 * k * kk1 * r1 / d3 - 9.0 * k * k * r1 * r1 * r2 / (w * d3)) * r2
        + (-18.0 * k * kk1 * r1.powi(3) / (w * d3) - 6.0 * k * kk2 * r * r1 * r1 / d3) * r2
        - (4.0 * k.powi(4) * r1 * w / d3 + 12.0 * k.powi(3) * kk1 * r * r1 * w / d3
            - 4.0 * k * k * kk1 * r1 * w / d3
            - 12.0 * k * k * kk1 * r1.powi(3) / d3
            - 4.0 * k * k * kk2 * r * r1 * r1 * w / d3
            - 18.0 * k * kk1 * kk1 * r * r1 * r1 / d3
            - 6.0 * k * kk1 * kk2 * r * r * r1 * w / d3
            + 9.0 * kk1 * kk1 * r1.powi(4) / d3
            + 6.0 * kk1 * kk1 * r1 * r1 / d3
            + 2.0 * kk1 * kk2 * r * r1 * w / d3
            + 6.0 * kk1 * kk2 * r * r1.powi(3) / d3
            + kk2 * kk2 * r * r * r1 * r1 * w / d3
            + 9.0 * k * k * kk1 * kk1 * r * r * w / d3
            - 6.0 * k * kk1 * kk1 * r * w / d3
            + kk1 * kk1 * w / d3);
    let p4 = -r2 / (g * g) + (-kk1 * r / (w * g * g) - 2.0 * k * r1 / (w * g * g)) * r1 - k * w / (g * g);
    let p5 = (6.0 * r2 / (w * g3a) - 12.0 * kk1 * r * r1 / g3a - 12.0 * k * r1 * r1 / g3a) * r2
        - (-12.0 * k * kk1 * r * r1 * w / g3a - 6.0 * k * k * r1 * r1 * w / g3a)
        - (-6.0 * kk1 * kk1 * r * r * w / g3a);
    [p1, p2, p3, p4, p5]
}
