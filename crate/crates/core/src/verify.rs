//! Fixed-seed property suites behind `localis verify`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::function_space::{
    hardy_pairing_extrapolated, make_grid, GridSpec, PairingKind, RegionMask, SampledFunction,
};
use crate::group::{GroupDescriptor, GroupElement, ScaledElement};
use crate::localization::{
    inclusion_exclusion_decomposition, presymbol, reduce_presymbol, symbol, symbol_field,
};
use crate::operator::{
    hilbert_transform, local_type_score, multiplication_operator, projection_matrix,
    proxy_of, self_covering_check, transform_mask, OperatorMatrix, WindowSpec,
};
use crate::representation::{act, double_act, RepParams};
use crate::synthesis::{envelope_refine, inverse_covariant, Embedding, OperatorField};

pub const SUITES: [&str; 6] = [
    "group",
    "function_space",
    "representation",
    "operator",
    "localization",
    "synthesis",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub property: String,
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: String,
    pub properties: Vec<PropertyResult>,
    pub pass: bool,
}

fn prop(name: &str, residual: f64, threshold: f64) -> PropertyResult {
    PropertyResult {
        property: name.to_string(),
        residual,
        threshold,
        pass: residual <= threshold,
    }
}

/// Runs one suite, or every suite for `"all"`.
pub fn run_suite(name: &str) -> Result<VerifyReport> {
    let properties = match name {
        "all" => {
            let mut all = Vec::new();
            for s in SUITES {
                all.extend(suite(s)?);
            }
            all
        }
        other if SUITES.contains(&other) => suite(other)?,
        other => return invalid(format!("unknown suite \"{other}\"")),
    };
    let pass = properties.iter().all(|p| p.pass);
    Ok(VerifyReport { suite: name.to_string(), properties, pass })
}

fn suite(name: &str) -> Result<Vec<PropertyResult>> {
    match name {
        "group" => group_suite(),
        "function_space" => function_space_suite(),
        "representation" => representation_suite(),
        "operator" => operator_suite(),
        "localization" => localization_suite(),
        "synthesis" => synthesis_suite(),
        _ => unreachable!(),
    }
}

fn random_element(group: GroupDescriptor, rng: &mut ChaCha8Rng) -> GroupElement {
    GroupElement((0..group.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect())
}

fn group_suite() -> Result<Vec<PropertyResult>> {
    let groups = [
        GroupDescriptor::euclidean(1),
        GroupDescriptor::euclidean(3),
        GroupDescriptor::heisenberg(1),
        GroupDescriptor::heisenberg(2),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut assoc, mut inv, mut dil, mut semi) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for group in groups {
        let e = group.identity();
        for _ in 0..1000 {
            let a = random_element(group, &mut rng);
            let b = random_element(group, &mut rng);
            let c = random_element(group, &mut rng);
            let ab_c = group.compose(&group.compose(&a, &b)?, &c)?;
            let a_bc = group.compose(&a, &group.compose(&b, &c)?)?;
            assoc = assoc.max(ab_c.max_abs_diff(&a_bc));

            let ai = group.inverse(&a)?;
            inv = inv
                .max(group.compose(&a, &ai)?.max_abs_diff(&e))
                .max(group.compose(&ai, &a)?.max_abs_diff(&e))
                .max(group.compose(&e, &a)?.max_abs_diff(&a));

            let (s, t) = (rng.gen_range(0.25..2.0), rng.gen_range(0.25..2.0));
            let lhs = group.dilate(t, &group.compose(&a, &b)?)?;
            let rhs = group.compose(&group.dilate(t, &a)?, &group.dilate(t, &b)?)?;
            dil = dil
                .max(lhs.max_abs_diff(&rhs))
                .max(group.dilate(s, &group.dilate(t, &a)?)?.max_abs_diff(&group.dilate(s * t, &a)?));

            let p = ScaledElement::new(t, a.clone())?;
            let q = ScaledElement::new(s, b.clone())?;
            let r = ScaledElement::new(rng.gen_range(0.25..2.0), c.clone())?;
            let pq_r = group.scaled_compose(&group.scaled_compose(&p, &q)?, &r)?;
            let p_qr = group.scaled_compose(&p, &group.scaled_compose(&q, &r)?)?;
            let pi = group.scaled_inverse(&p)?;
            semi = semi
                .max(pq_r.max_abs_diff(&p_qr))
                .max(group.scaled_compose(&p, &pi)?.max_abs_diff(&group.scaled_identity()))
                .max(group.scaled_compose(&pi, &p)?.max_abs_diff(&group.scaled_identity()));
        }
    }
    Ok(vec![
        prop("group.associativity", assoc, 1e-12),
        prop("group.identity-inverse", inv, 1e-12),
        prop("group.dilation-automorphism", dil, 1e-12),
        prop("group.semidirect-axioms", semi, 1e-12),
    ])
}

fn e1_grid() -> Result<GridSpec> {
    make_grid(GroupDescriptor::euclidean(1), 0.0625, 8.0)
}

fn function_space_suite() -> Result<Vec<PropertyResult>> {
    let grid = make_grid(GroupDescriptor::euclidean(2), 0.25, 2.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let random_box = |rng: &mut ChaCha8Rng| {
        let lo: Vec<f64> = (0..2).map(|_| rng.gen_range(-2.0..0.5)).collect();
        let hi: Vec<f64> = lo.iter().map(|l| l + rng.gen_range(0.0..1.5)).collect();
        RegionMask::closed_box(&grid, &lo, &hi)
    };
    let mut algebra = 0.0f64;
    for _ in 0..50 {
        let (f, g) = (random_box(&mut rng), random_box(&mut rng));
        let (pf, pg) = (projection_matrix(&f), projection_matrix(&g));
        let prod = pf.compose(&pg)?;
        algebra = algebra
            .max(prod.max_abs_diff(&projection_matrix(&f.intersection(&g))))
            .max(pf.compose(&pf)?.max_abs_diff(&pf));
    }
    // families linear in t extrapolate exactly to t = 0
    let line = make_grid(GroupDescriptor::euclidean(1), 0.0625, 4.0)?;
    let levels = [0.25, 0.125];
    let phi = |t: f64| SampledFunction::from_fn(&line, 2.0, |x| (1.0 + t) * (-x[0] * x[0]).exp());
    let psi = SampledFunction::from_fn(&line, 2.0, |x| (-x[0] * x[0]).exp());
    let f1: Vec<_> = levels.iter().map(|&t| phi(t)).collect();
    let f2 = vec![psi.clone(), psi.clone()];
    let limit = hardy_pairing_extrapolated(&f1, &f2, &levels)?;
    let exact = crate::function_space::pairing(PairingKind::Hardy, &[phi(0.0)], &[psi], &[1.0])?;
    Ok(vec![
        prop("function_space.projection-algebra", algebra, 0.0),
        prop("function_space.hardy-extrapolation", (limit - exact).abs(), 1e-12),
    ])
}

fn dyadic_scale(rng: &mut ChaCha8Rng) -> f64 {
    [1.0, 0.5, 0.25, 0.125][rng.gen_range(0..4)]
}

fn lattice_point(grid: &GridSpec, rng: &mut ChaCha8Rng, half_width: f64) -> GroupElement {
    let h = grid.spacing()[0];
    let k = (half_width / h).round() as i64;
    GroupElement(vec![rng.gen_range(-k..=k) as f64 * h])
}

/// Random step function on `[−2, 2]`, constant on cells of eight grid steps,
/// so that every dilation by `t ≥ 1/8` samples each cell equally.
fn coarse_step_function(grid: &GridSpec, rng: &mut ChaCha8Rng) -> SampledFunction {
    let h = grid.spacing()[0];
    let cells: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
    SampledFunction::from_fn(grid, 2.0, |x| {
        let j = (x[0] / h).round() as i64 + 32;
        if (0..64).contains(&j) {
            cells[(j / 8) as usize]
        } else {
            0.0
        }
    })
}

fn representation_suite() -> Result<Vec<PropertyResult>> {
    let grid = e1_grid()?;
    let group = grid.group;
    let params = RepParams::new(&grid, 2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut hom = 0.0f64;
    let mut iso = 0.0f64;
    for _ in 0..100 {
        let f = SampledFunction::from_fn(&grid, 2.0, |x| {
            if x[0].abs() <= 2.0 { (3.0 * x[0]).sin() + 0.5 } else { 0.0 }
        });
        let noise: Vec<f64> = f.values.iter().map(|v| v * rng.gen_range(0.5..1.5)).collect();
        let f = SampledFunction::new(grid.clone(), noise, 2.0)?;
        let s1 = ScaledElement::new(dyadic_scale(&mut rng), lattice_point(&grid, &mut rng, 2.0))?;
        // g₁·τ_{t₁}(g₂) must stay on the lattice
        let step = grid.spacing()[0] / s1.t;
        let kmax = (2.0 / step).round() as i64;
        let g2 = GroupElement(vec![rng.gen_range(-kmax..=kmax) as f64 * step]);
        let s2 = ScaledElement::new(dyadic_scale(&mut rng), g2)?;
        let lhs = act(&params, &s1, &act(&params, &s2, &f)?)?;
        let rhs = act(&params, &group.scaled_compose(&s1, &s2)?, &f)?;
        hom = hom.max(lhs.max_abs_diff(&rhs));

        let step = coarse_step_function(&grid, &mut rng);
        let norm = step.lp_norm();
        let moved = act(&params, &s1, &step)?.lp_norm();
        iso = iso.max((moved - norm).abs() / norm.max(f64::MIN_POSITIVE));
    }
    let window = WindowSpec::homogeneous_box(&grid, 1.0)?;
    let pe = projection_matrix(&window.mask);
    let mut cov = 0.0f64;
    for _ in 0..50 {
        let s = ScaledElement::new(dyadic_scale(&mut rng), lattice_point(&grid, &mut rng, 4.0))?;
        let si = group.scaled_inverse(&s)?;
        let lhs = double_act(&params, &si, &si, &pe)?;
        let rhs = projection_matrix(&transform_mask(&s, &window.mask)?.mask);
        cov = cov.max(lhs.max_abs_diff(&rhs));
    }
    Ok(vec![
        prop("representation.homomorphism", hom, 1e-12),
        prop("representation.isometry", iso, 1e-12),
        prop("representation.projection-covariance", cov, 0.0),
    ])
}

fn msin(grid: &GridSpec) -> OperatorMatrix {
    multiplication_operator(&SampledFunction::from_fn(grid, 2.0, |x| x[0].sin()))
}

fn operator_suite() -> Result<Vec<PropertyResult>> {
    let grid = e1_grid()?;
    let score = local_type_score(&msin(&grid), 1.0, 0, 16, 4)?;
    let unit = WindowSpec::homogeneous_box(&grid, 1.0)?;
    let certified = self_covering_check(&unit, 2.0, 0, 5)?.covering;
    let refuted = !self_covering_check(&unit, 1.4, 0, 5)?.covering;
    let covering = if certified && refuted { 0.0 } else { 1.0 };
    Ok(vec![
        prop("operator.multiplication-local-type", score, 0.0),
        prop("operator.self-covering", covering, 0.0),
    ])
}

fn localization_suite() -> Result<Vec<PropertyResult>> {
    let grid = e1_grid()?;
    let group = grid.group;
    let params = RepParams::new(&grid, 2.0);
    let window = WindowSpec::homogeneous_box(&grid, 1.0)?;
    let hilbert = hilbert_transform(&grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);

    let mut inter = 0.0f64;
    for _ in 0..5 {
        let u = ScaledElement::shift(lattice_point(&grid, &mut rng, 2.0));
        let ui = group.scaled_inverse(&u)?;
        let moved = double_act(&params, &ui, &ui, &hilbert)?;
        let l = ScaledElement::new(dyadic_scale(&mut rng), lattice_point(&grid, &mut rng, 1.0))?;
        let r = ScaledElement::new(dyadic_scale(&mut rng), lattice_point(&grid, &mut rng, 1.0))?;
        let lhs = presymbol(&moved, &l, &r, &window, 2.0)?;
        let rhs = presymbol(
            &hilbert,
            &group.scaled_compose(&ui, &l)?,
            &group.scaled_compose(&ui, &r)?,
            &window,
            2.0,
        )?;
        inter = inter.max((lhs - rhs).amax());
    }

    let a = msin(&grid);
    let mut rate = 0.0f64;
    for g in [0.0, 1.0, -2.0] {
        let frozen = OperatorMatrix::identity(&grid).scaled(f64::sin(g));
        let diff = a.sub(&frozen)?;
        for t in [0.5, 0.25, 0.125] {
            let s = ScaledElement::new(t, GroupElement(vec![g]))?;
            let proxy = proxy_of(&symbol(&diff, &s, &window, 2.0)?, 0);
            let h = grid.spacing()[0];
            let step = (1.0 / t).round() as i64;
            let oracle = window
                .indices()
                .iter()
                .map(|&i| grid.point(i)[0])
                .filter(|xi| ((xi / h).round() as i64) % step == 0)
                .map(|xi| ((g + t * xi).sin() - g.sin()).abs())
                .fold(0.0, f64::max);
            rate = rate.max((proxy - oracle).abs());
        }
    }

    let lattice: Vec<GroupElement> = (-8..=8).map(|k| GroupElement(vec![k as f64 * 0.125])).collect();
    let field = symbol_field(&hilbert, &window, &[0.5, 0.25], &lattice, 2.0)?;
    let mut spread = 0.0f64;
    for row in &field.blocks {
        for b in row {
            spread = spread.max((b - &row[0]).amax());
        }
    }

    let small = make_grid(GroupDescriptor::euclidean(1), 0.05, 4.0)?;
    let mut ie = 0.0f64;
    for _ in 0..10 {
        let lo = rng.gen_range(-2.0..0.0);
        let target = RegionMask::closed_box(&small, &[lo], &[lo + rng.gen_range(0.5..2.0)]);
        let mut cover = Vec::new();
        let mut x = lo - rng.gen_range(0.0..0.2);
        while x <= lo + 2.0 {
            let len = rng.gen_range(0.3..0.8);
            cover.push(RegionMask::closed_box(&small, &[x], &[x + len]));
            x += len * rng.gen_range(0.5..0.95);
        }
        let d = inclusion_exclusion_decomposition(&target, &cover)?;
        ie = ie.max(d.assemble(&target, &cover).max_abs_diff(&projection_matrix(&target)));
    }
    let l = ScaledElement::new(0.5, GroupElement(vec![1.0]))?;
    let r = ScaledElement::new(0.25, GroupElement(vec![1.5]))?;
    let red = reduce_presymbol(&grid, &window, &l, &r, 0.125, 2.0, 2.0)?;
    let rebuilt = red.assemble(|s| symbol(&a, s, &window, 2.0))?;
    ie = ie.max((rebuilt - presymbol(&a, &l, &r, &window, 2.0)?).amax());

    Ok(vec![
        prop("localization.intertwining", inter, 1e-10),
        prop("localization.multiplication-symbol", rate, 1e-12),
        prop("localization.constant-symbol", spread, 1e-10),
        prop("localization.inclusion-exclusion", ie, 1e-10),
    ])
}

fn synthesis_suite() -> Result<Vec<PropertyResult>> {
    let grid = e1_grid()?;
    let a = msin(&grid);
    let rows = envelope_refine(
        &a,
        |x| Ok(OperatorMatrix::identity(&grid).scaled(x.0[0].sin())),
        &[-2.0],
        &[2.0],
        &[2, 3, 4, 5],
        0,
    )?;
    let ratio_miss = rows
        .windows(2)
        .map(|w| {
            let q = w[1].norm / w[0].norm;
            (0.4 - q).max(q - 0.6).max(0.0)
        })
        .fold(0.0, f64::max);

    let window = WindowSpec::homogeneous_box(&grid, 1.0)?;
    let lattice: Vec<GroupElement> = grid
        .points()
        .filter(|x| x[0].abs() <= 2.0)
        .map(GroupElement)
        .collect();
    let levels = [0.25, 0.125];
    let ident = OperatorField::constant(&OperatorMatrix::identity(&grid), &window, &levels, &lattice)?;
    let rec = inverse_covariant(&ident, PairingKind::Hardy, false)?;
    let idx = rec.covered.indices();
    let mut round = (rec.operator.block(&idx, &idx) - DMatrix::identity(idx.len(), idx.len())).amax();
    let sf = symbol_field(&a, &window, &levels, &lattice, 2.0)?;
    let field = OperatorField::from_symbol_field(&sf, Embedding::Covariant)?;
    let rec = inverse_covariant(&field, PairingKind::Hardy, false)?;
    let idx = rec.covered.indices();
    round = round.max((rec.operator.block(&idx, &idx) - a.block(&idx, &idx)).amax());

    let params = RepParams::new(&grid, 2.0);
    let mut inter = 0.0f64;
    for b in [0.5, -1.25] {
        let moved = inverse_covariant(&field.translate(&GroupElement(vec![b]))?, PairingKind::Hardy, false)?;
        let inv = ScaledElement::shift(GroupElement(vec![-b]));
        let expected = double_act(&params, &inv, &inv, &rec.operator)?;
        inter = inter.max(moved.operator.max_abs_diff(&expected));
    }
    Ok(vec![
        prop("synthesis.envelope-rate", ratio_miss, 0.0),
        prop("synthesis.round-trip", round, 1e-12),
        prop("synthesis.intertwining", inter, 1e-10),
    ])
}
