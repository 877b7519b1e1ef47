//! The scenario table and one runner per scenario.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::time::Instant;

use qeffect::effects::{
    below, effects_disjoint, factor_contraction, min_dominating_scale, range_inclusion,
    support_projection, weak_atom_bound,
};
use qeffect::incompat::{
    binary_jointly_measurable, jm_threshold, qubit_compat, qubit_effect, region_sample,
    FeasibilityStatus, Oracle, RegionCell, ThresholdOptions,
};
use qeffect::io::region_to_csv;
use qeffect::models::{
    cyclic_lattice, haversine_trend, lattice_convolution, multislit, multislit_all_disjoint,
    number_phase_trend, smeared_support, AngleInterval, FunctionOnGrid, HaversineTrendOptions,
    TrendReport,
};
use qeffect::numerics::{eig_hermitian, min_eigenvalue, operator_norm, real_vector};
use qeffect::observables::{
    com_observables, complementary_family, dilation_complementarity, minimal_dilation,
    qubit_sharp_x, qubit_sharp_z,
};
use qeffect::{
    BinaryObservable, CMatrix, Contraction, DiscreteObservable, Effect, HermitianMatrix,
    OutcomeFamily, C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::{json, Value};

use crate::config::{Params, ScenarioConfig, Tolerances};
use crate::report::{Outcome, Report, Series, Status, SERIES_FILE};
use crate::CliError;

type Job = Box<dyn FnOnce() -> Result<Body, CliError>>;
type Builder = fn(&mut Params, &Tolerances, u64) -> Result<Job, CliError>;

/// What a scenario computes, before it is wrapped into a [`Report`].
struct Body {
    values: Value,
    certificates: Value,
    series: Option<Series>,
    inconclusive: bool,
}

pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    build: Builder,
}

pub const SCENARIOS: [Scenario; 11] = [
    Scenario {
        name: "check-order",
        description: "random M = CK: order test, contraction factorisation and range inclusion",
        build: check_order,
    },
    Scenario {
        name: "weak-atom",
        description: "largest multiple of a pure state below a diagonal effect",
        build: weak_atom,
    },
    Scenario {
        name: "complementarity",
        description: "support-intersection verdicts over outcome-set families",
        build: complementarity,
    },
    Scenario {
        name: "dilation-check",
        description: "minimal Naimark dilations and the dilation route to complementarity",
        build: dilation_check,
    },
    Scenario {
        name: "jm-feasible",
        description: "joint measurability of two binary observables by cyclic projections",
        build: jm_feasible,
    },
    Scenario {
        name: "qubit-region",
        description: "noise region J(E1,E2) of a qubit pair sampled on a grid",
        build: qubit_region,
    },
    Scenario {
        name: "noise-threshold",
        description: "maximal incompatibility j(E1,E2) by bisection on equal noise",
        build: noise_threshold,
    },
    Scenario {
        name: "haversine-trend",
        description: "common lower bounds of discretised haversine position/momentum effects",
        build: haversine,
    },
    Scenario {
        name: "number-phase-trend",
        description: "weak-atom bound of truncated phase effects on number states",
        build: number_phase,
    },
    Scenario {
        name: "multislit",
        description: "slit position versus periodic momentum class on C^s (x) C^m",
        build: multislit_scenario,
    },
    Scenario {
        name: "convolution-jauch",
        description: "support bound and disjointness for convolution-smeared lattice position",
        build: convolution_jauch,
    },
];

/// One line per scenario: the name, padded, then its description.
pub fn list_scenarios() -> String {
    let width = SCENARIOS.iter().map(|s| s.name.len()).max().unwrap_or(0);
    SCENARIOS
        .iter()
        .map(|s| format!("{:<width$}  {}\n", s.name, s.description))
        .collect()
}

/// Runs the configured scenario. Parameters are validated before any work.
pub fn run(cfg: &ScenarioConfig) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let scenario = SCENARIOS
        .iter()
        .find(|s| s.name == cfg.scenario)
        .ok_or_else(|| {
            let names: Vec<&str> = SCENARIOS.iter().map(|s| s.name).collect();
            CliError::invalid(format!(
                "unknown scenario `{}` (known: {})",
                cfg.scenario,
                names.join(", ")
            ))
        })?;
    cfg.tolerances.policy()?;
    let mut params = Params::new(&cfg.params);
    let job = (scenario.build)(&mut params, &cfg.tolerances, cfg.seed)?;
    let inputs = params.finish()?;
    let body = job()?;
    let report = Report {
        scenario: scenario.name.to_string(),
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        inputs,
        tolerances: cfg.tolerances.clone(),
        status: if body.inconclusive {
            Status::Inconclusive
        } else {
            Status::Ok
        },
        values: body.values,
        certificates: body.certificates,
        series_file: body.series.as_ref().map(|_| SERIES_FILE.to_string()),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok(Outcome {
        report,
        series: body.series,
    })
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

fn positive(key: &str, v: usize) -> Result<usize, CliError> {
    if v == 0 {
        return Err(CliError::invalid(format!("{key} must be positive")));
    }
    Ok(v)
}

fn unit_interval(key: &str, v: f64) -> Result<f64, CliError> {
    if !(0.0..=1.0).contains(&v) {
        return Err(CliError::invalid(format!("{key} = {v} must lie in [0, 1]")));
    }
    Ok(v)
}

fn check_order(p: &mut Params, tol: &Tolerances, seed: u64) -> Result<Job, CliError> {
    let dim = positive("dim", p.usize("dim", 4)?)?;
    let rank = p.usize("rank", dim)?;
    let cases = positive("cases", p.usize("cases", 20)?)?;
    let c_norm = unit_interval("contraction_norm", p.f64("contraction_norm", 0.9)?)?;
    if rank == 0 || rank > dim {
        return Err(CliError::invalid(format!("rank must lie in 1..={dim}")));
    }
    let pol = tol.policy()?;
    Ok(Box::new(move || {
        let mut rng = rng(seed);
        let mut series =
            Series::new(&["case", "factor_norm", "factor_residual", "dominating_scale"]);
        let (mut ordered, mut included) = (0, 0);
        let (mut worst_residual, mut worst_norm) = (0.0f64, 0.0f64);
        for case in 0..cases {
            let k = gaussian(dim, rank, &mut rng) * gaussian(rank, dim, &mut rng);
            let k = k.unscale(operator_norm(&k));
            let c = gaussian(dim, dim, &mut rng);
            let c = c.scale(c_norm / operator_norm(&c));
            let k = Contraction::new(k)?;
            let m = Contraction::new(&c * k.matrix())?;
            let mm = Effect::new(m.gram(), &pol)?;
            let kk = Effect::new(k.gram(), &pol)?;
            ordered += usize::from(below(&mm, &kk, &pol)?);
            included += usize::from(range_inclusion(&m, &k, &pol)?);
            let factor = factor_contraction(&m, &k, &pol)?;
            let residual = (factor.matrix() * k.matrix() - m.matrix()).norm();
            let scale = min_dominating_scale(&m, &k, &pol)?;
            worst_residual = worst_residual.max(residual);
            worst_norm = worst_norm.max(factor.operator_norm());
            series.push(vec![case as f64, factor.operator_norm(), residual, scale]);
        }
        Ok(Body {
            values: json!({
                "cases": cases,
                "ordered": ordered,
                "range_included": included,
                "all_ordered": ordered == cases && included == cases,
            }),
            certificates: json!({
                "max_factor_residual": worst_residual,
                "max_factor_norm": worst_norm,
                "contraction_norm": c_norm,
            }),
            series: Some(series),
            inconclusive: false,
        })
    }))
}

fn weak_atom(p: &mut Params, tol: &Tolerances, _seed: u64) -> Result<Job, CliError> {
    let diag = p.f64_list("e", "1,0.25")?;
    let phi = p.f64_list("phi", "1,1")?;
    let pol = tol.policy()?;
    if diag.len() != phi.len() || diag.is_empty() {
        return Err(CliError::invalid(format!(
            "e has {} entries but phi has {}",
            diag.len(),
            phi.len()
        )));
    }
    let norm = phi.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(CliError::invalid("phi must be nonzero"));
    }
    let e = Effect::from_diagonal(&diag)?;
    let phi: Vec<f64> = phi.iter().map(|x| x / norm).collect();
    Ok(Box::new(move || {
        let v = real_vector(&phi);
        let bound = weak_atom_bound(&e, &v)?;
        let residual = min_eigenvalue(&(e.matrix() - &HermitianMatrix::outer(&v).scale(bound)));
        let in_support = below(
            &Effect::weak_atom(&v)?,
            &support_projection(&e, &pol).into(),
            &pol,
        )?;
        Ok(Body {
            values: json!({ "bound": bound, "phi_in_support": in_support }),
            certificates: json!({ "min_eigenvalue_at_bound": residual }),
            series: None,
            inconclusive: false,
        })
    }))
}

/// Observable pairs shared by the complementarity scenarios.
fn model_pair(
    p: &mut Params,
    seed: u64,
) -> Result<Box<dyn FnOnce() -> Result<(DiscreteObservable, DiscreteObservable), CliError>>, CliError>
{
    let model = p.string("model", "lattice");
    match model.as_str() {
        "qubit" => Ok(Box::new(|| Ok((qubit_sharp_z(), qubit_sharp_x())))),
        "lattice" => {
            let d = p.usize("d", 5)?;
            Ok(Box::new(move || {
                let l = cyclic_lattice(d)?;
                Ok((l.position, l.momentum))
            }))
        }
        "multislit" => {
            let s = p.usize("s", 3)?;
            let m = p.usize("m", 4)?;
            Ok(Box::new(move || Ok(multislit(s, m)?)))
        }
        "random" => {
            let dim = positive("dim", p.usize("dim", 3)?)?;
            let outcomes = p.usize("outcomes", 3)?;
            if outcomes < 2 {
                return Err(CliError::invalid("outcomes must be at least 2"));
            }
            Ok(Box::new(move || {
                let mut rng = rng(seed);
                let e = random_povm(dim, outcomes, &mut rng)?;
                let f = random_povm(dim, outcomes, &mut rng)?;
                Ok((e, f))
            }))
        }
        other => Err(CliError::invalid(format!(
            "model `{other}` is not one of qubit, lattice, multislit, random"
        ))),
    }
}

/// `S^{-1/2} A_i* A_i S^{-1/2}` with rank-one Gaussian `A_i` plus a full-rank
/// first block so that `S` is invertible.
fn random_povm(
    dim: usize,
    outcomes: usize,
    rng: &mut ChaCha8Rng,
) -> Result<DiscreteObservable, CliError> {
    let blocks: Vec<CMatrix> = (0..outcomes)
        .map(|i| gaussian(if i == 0 { dim } else { 1 }, dim, rng))
        .collect();
    let s = blocks
        .iter()
        .fold(CMatrix::zeros(dim, dim), |acc, a| acc + a.adjoint() * a);
    let inv_sqrt = eig_hermitian(&HermitianMatrix::hermitian_part(&s)).map(|l| 1.0 / l.sqrt());
    let effects = blocks
        .iter()
        .map(|a| {
            let m = inv_sqrt.matrix() * a.adjoint() * a * inv_sqrt.matrix();
            Effect::from_matrix(HermitianMatrix::hermitian_part(&m))
        })
        .collect::<qeffect::Result<Vec<_>>>()?;
    Ok(DiscreteObservable::with_index_labels(effects)?)
}

fn family(p: &mut Params) -> Result<usize, CliError> {
    positive("k_max", p.usize("k_max", 2)?)
}

fn complementarity(p: &mut Params, tol: &Tolerances, seed: u64) -> Result<Job, CliError> {
    let pair = model_pair(p, seed)?;
    let k_max = family(p)?;
    let pol = tol.policy()?;
    Ok(Box::new(move || {
        let (e, f) = pair()?;
        let (a0, b0) = (
            OutcomeFamily::up_to_size(e.len(), k_max),
            OutcomeFamily::up_to_size(f.len(), k_max),
        );
        let fv = complementary_family(&e, &f, &a0, &b0, &pol)?;
        let mut series = Series::new(&["x_index", "y_index", "disjoint", "overlap_cosine"]);
        for (n, v) in fv.verdicts.iter().enumerate() {
            let (i, j) = (n / b0.sets().len(), n % b0.sets().len());
            series.push(vec![
                i as f64,
                j as f64,
                f64::from(u8::from(v.disjoint)),
                v.overlap_cosine,
            ]);
        }
        let disjoint = fv.verdicts.iter().filter(|v| v.disjoint).count();
        let boundary = fv.verdicts.iter().filter(|v| v.boundary).count();
        let max_disjoint_cosine = fv
            .verdicts
            .iter()
            .filter(|v| v.disjoint)
            .map(|v| v.overlap_cosine)
            .fold(0.0, f64::max);
        let first_overlap = fv.verdicts.iter().find(|v| !v.disjoint);
        Ok(Body {
            values: json!({
                "complementary": fv.complementary,
                "pairs": fv.verdicts.len(),
                "disjoint": disjoint,
                "dim": e.dim(),
            }),
            certificates: json!({
                "max_disjoint_overlap_cosine": max_disjoint_cosine,
                "boundary_verdicts": boundary,
                "first_overlap": first_overlap,
            }),
            series: Some(series),
            inconclusive: false,
        })
    }))
}

fn dilation_check(p: &mut Params, tol: &Tolerances, seed: u64) -> Result<Job, CliError> {
    let pair = model_pair(p, seed)?;
    let k_max = family(p)?;
    let pol = tol.policy()?;
    Ok(Box::new(move || {
        let (e, f) = pair()?;
        let dil_e = minimal_dilation(&e, &pol)?;
        let dil_f = minimal_dilation(&f, &pol)?;
        dil_e.validate(&e, &pol)?;
        dil_f.validate(&f, &pol)?;
        let (a0, b0) = (
            OutcomeFamily::up_to_size(e.len(), k_max),
            OutcomeFamily::up_to_size(f.len(), k_max),
        );
        let support = complementary_family(&e, &f, &a0, &b0, &pol)?;
        let mut series = Series::new(&[
            "x_index",
            "y_index",
            "support_disjoint",
            "dilation_disjoint",
            "eta_weight",
        ]);
        let mut agree = 0;
        let mut disjoint = 0;
        for (i, x) in a0.sets().iter().enumerate() {
            for (j, y) in b0.sets().iter().enumerate() {
                let d = dilation_complementarity(&e, &f, x, y, &dil_e, &dil_f, &pol)?;
                let s = &support.verdicts[i * b0.sets().len() + j];
                agree += usize::from(d.disjoint == s.disjoint);
                disjoint += usize::from(d.disjoint);
                series.push(vec![
                    i as f64,
                    j as f64,
                    f64::from(u8::from(s.disjoint)),
                    f64::from(u8::from(d.disjoint)),
                    d.overlap_cosine,
                ]);
            }
        }
        let pairs = a0.sets().len() * b0.sets().len();
        Ok(Body {
            values: json!({
                "pairs": pairs,
                "agree": agree,
                "dilation_disjoint": disjoint,
                "complementary": disjoint == pairs,
                "dilation_dims": [dil_e.dilation_dim(), dil_f.dilation_dim()],
            }),
            certificates: json!({
                "reconstruction_error": [dil_e.reconstruction_error(&e), dil_f.reconstruction_error(&f)],
            }),
            series: Some(series),
            inconclusive: false,
        })
    }))
}

/// Two binary observables: qubit effects from Bloch data `e0,x,y,z` or a
/// random pair, each mixed as `λE + (1-λ)I/2`.
fn binary_pair(
    p: &mut Params,
    seed: u64,
    with_noise: bool,
) -> Result<(BinaryObservable, BinaryObservable, bool), CliError> {
    let model = p.string("model", "qubit");
    let (lambda, mu) = if with_noise {
        (
            unit_interval("lambda", p.f64("lambda", 1.0)?)?,
            unit_interval("mu", p.f64("mu", 1.0)?)?,
        )
    } else {
        (1.0, 1.0)
    };
    let mixed = |e: Effect, l: f64| -> Result<BinaryObservable, CliError> {
        let m = &(e.matrix() * l) + &HermitianMatrix::scalar(e.dim(), 0.5 * (1.0 - l));
        Ok(BinaryObservable::new(Effect::from_matrix(m)?))
    };
    match model.as_str() {
        "qubit" => {
            let bloch = |v: Vec<f64>, key: &str| -> Result<Effect, CliError> {
                if v.len() != 4 {
                    return Err(CliError::invalid(format!("{key} needs e0,x,y,z")));
                }
                Ok(qubit_effect(v[0], [v[1], v[2], v[3]])?)
            };
            let e1 = bloch(p.f64_list("first", "1,0,0,1")?, "first")?;
            let e2 = bloch(p.f64_list("second", "1,1,0,0")?, "second")?;
            Ok((mixed(e1, lambda)?, mixed(e2, mu)?, true))
        }
        "random" => {
            let dim = positive("dim", p.usize("dim", 3)?)?;
            let mut rng = rng(seed);
            let e1 = random_povm(dim, 2, &mut rng)?.effect(0).clone();
            let e2 = random_povm(dim, 2, &mut rng)?.effect(0).clone();
            Ok((mixed(e1, lambda)?, mixed(e2, mu)?, false))
        }
        other => Err(CliError::invalid(format!(
            "model `{other}` is not one of qubit, random"
        ))),
    }
}

fn jm_feasible(p: &mut Params, tol: &Tolerances, seed: u64) -> Result<Job, CliError> {
    let (a, b, qubit) = binary_pair(p, seed, true)?;
    let pol = tol.policy()?;
    let opts = tol.dykstra();
    Ok(Box::new(move || {
        let r = binary_jointly_measurable(&a, &b, &pol, &opts)?;
        let closed = if qubit {
            let c = qubit_compat(a.yes(), b.yes())?;
            json!({ "compatible": c.compatible, "slack": c.slack })
        } else {
            Value::Null
        };
        let joint = r.joint.as_ref().map(|g| {
            let cells: Vec<f64> = (0..2)
                .flat_map(|x| (0..2).map(move |y| (x, y)))
                .map(|(x, y)| min_eigenvalue(g.cell(x, y).matrix()))
                .collect();
            json!({
                "cell_min_eigenvalues": cells,
                "marginal_defects": [
                    g.first_marginal(0).distance(a.yes().matrix()),
                    g.second_marginal(0).distance(b.yes().matrix()),
                ],
            })
        });
        Ok(Body {
            values: json!({
                "status": status_name(r.status),
                "qubit_closed_form": closed,
            }),
            certificates: json!({
                "residual": r.residual,
                "iterations": r.iterations,
                "joint": joint,
            }),
            series: None,
            inconclusive: r.status == FeasibilityStatus::Inconclusive,
        })
    }))
}

fn status_name(s: FeasibilityStatus) -> &'static str {
    match s {
        FeasibilityStatus::Feasible => "feasible",
        FeasibilityStatus::Infeasible => "infeasible",
        FeasibilityStatus::Inconclusive => "inconclusive",
    }
}

fn oracle(
    p: &mut Params,
    tol: &Tolerances,
    default: &str,
    qubit: bool,
) -> Result<Oracle, CliError> {
    match p.string("oracle", default).as_str() {
        "dykstra" => Ok(Oracle::Dykstra(tol.dykstra())),
        "closed-form" if qubit => Ok(Oracle::QubitClosedForm),
        "closed-form" => Err(CliError::invalid(
            "the closed-form oracle needs a qubit pair",
        )),
        other => Err(CliError::invalid(format!(
            "oracle `{other}` is not one of dykstra, closed-form"
        ))),
    }
}

fn qubit_region(p: &mut Params, tol: &Tolerances, seed: u64) -> Result<Job, CliError> {
    let (a, b, qubit) = binary_pair(p, seed, false)?;
    let grid = p.usize("grid", 101)?;
    let opts = ThresholdOptions {
        oracle: oracle(p, tol, "closed-form", qubit)?,
        tol: tol.threshold_tol,
        ..ThresholdOptions::default()
    };
    let pol = tol.policy()?;
    Ok(Box::new(move || {
        let map = region_sample(&a, &b, grid, &opts, &pol)?;
        let count = |c: RegionCell| map.cells.iter().flatten().filter(|&&x| x == c).count();
        // Largest feasible point on the diagonal λ = μ.
        let diagonal = (0..map.axis.len())
            .filter(|&i| map.cell(i, i) == RegionCell::Feasible)
            .map(|i| map.axis[i])
            .fold(f64::NAN, f64::max);
        let mut series = Series::new(&["lambda", "mu", "feasible"]);
        for line in region_to_csv(&map).lines().skip(1) {
            let row = line
                .split(',')
                .map(|s| s.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::internal(e.to_string()))?;
            series.push(row);
        }
        let inconclusive = count(RegionCell::Inconclusive);
        Ok(Body {
            values: json!({
                "grid": grid,
                "feasible": count(RegionCell::Feasible),
                "infeasible": count(RegionCell::Infeasible),
                "inconclusive": inconclusive,
                "diagonal_boundary": diagonal,
            }),
            certificates: json!({ "oracle_stats": map.oracle_stats }),
            series: Some(series),
            inconclusive: inconclusive > 0,
        })
    }))
}

fn noise_threshold(p: &mut Params, tol: &Tolerances, seed: u64) -> Result<Job, CliError> {
    let (a, b, qubit) = binary_pair(p, seed, false)?;
    let opts = ThresholdOptions {
        oracle: oracle(p, tol, "dykstra", qubit)?,
        tol: tol.threshold_tol,
        ..ThresholdOptions::default()
    };
    let pol = tol.policy()?;
    Ok(Box::new(move || {
        let r = jm_threshold(&a, &b, &opts, &pol)?;
        Ok(Body {
            values: json!({ "threshold": r.value, "bracket": r.bracket, "widened": r.widened }),
            certificates: json!({ "oracle_stats": r.oracle_stats }),
            series: None,
            inconclusive: r.widened,
        })
    }))
}

fn trend_body(trend: TrendReport, with_bounds: bool) -> Result<Body, CliError> {
    let mut series = if with_bounds {
        Series::new(&["parameter", "value", "upper", "control", "overlap_dim"])
    } else {
        Series::new(&["parameter", "value"])
    };
    for pt in &trend.points {
        let mut row = vec![pt.parameter as f64, pt.value];
        if with_bounds {
            row.push(pt.upper.unwrap_or(f64::NAN));
            row.push(pt.control.unwrap_or(f64::NAN));
            row.push(pt.overlap_dim.map_or(f64::NAN, |k| k as f64));
        }
        series.push(row);
    }
    let inconclusive = trend.points.iter().any(|p| p.inconclusive);
    Ok(Body {
        values: json!({
            "parameter": trend.parameter,
            "quantity": trend.quantity,
            "values": trend.values(),
            "non_increasing": trend.non_increasing,
            "band": trend.band,
        }),
        certificates: serde_json::to_value(&trend.points)?,
        series: Some(series),
        inconclusive,
    })
}

fn haversine(p: &mut Params, tol: &Tolerances, _seed: u64) -> Result<Job, CliError> {
    let d_list = p.usize_list("d", "32,64,128,256")?;
    let pol = tol.policy()?;
    let opts = HaversineTrendOptions {
        compressed: tol.lower_bound(),
        ..HaversineTrendOptions::default()
    };
    Ok(Box::new(move || {
        trend_body(haversine_trend(&d_list, &opts, &pol)?, true)
    }))
}

fn number_phase(p: &mut Params, _tol: &Tolerances, _seed: u64) -> Result<Job, CliError> {
    let n_list = p.usize_list("n", "8,16,32,64")?;
    let arc = p.f64_list("arc", &format!("0,{PI}"))?;
    let state = p.usize("state", 0)?;
    if arc.len() != 2 {
        return Err(CliError::invalid("arc needs start,end"));
    }
    let arc = AngleInterval::new(arc[0], arc[1])?;
    Ok(Box::new(move || {
        trend_body(number_phase_trend(&n_list, &arc, state)?, false)
    }))
}

fn multislit_scenario(p: &mut Params, tol: &Tolerances, _seed: u64) -> Result<Job, CliError> {
    let s = p.usize("s", 3)?;
    let m = p.usize("m", 4)?;
    let pol = tol.policy()?;
    Ok(Box::new(move || {
        let (q, pm) = multislit(s, m)?;
        let mut series = Series::new(&["slit", "class", "disjoint", "overlap_cosine"]);
        let mut disjoint = 0;
        for (i, a) in q.effects().iter().enumerate() {
            for (k, b) in pm.effects().iter().enumerate() {
                let d = effects_disjoint(a, b, &pol)?;
                disjoint += usize::from(d.disjoint);
                series.push(vec![
                    i as f64,
                    k as f64,
                    f64::from(u8::from(d.disjoint)),
                    d.overlap_cosine,
                ]);
            }
        }
        let all = multislit_all_disjoint(&q, &pm, &pol)?;
        let com = com_observables(&q, &pm, &pol)?.rank();
        Ok(Body {
            values: json!({
                "dim": s * m,
                "pairs": s * s,
                "disjoint": disjoint,
                "all_disjoint": all,
                "com_rank": com,
            }),
            certificates: json!({
                "max_overlap_cosine": series.rows.iter().map(|r| r[3]).fold(0.0, f64::max),
            }),
            series: Some(series),
            inconclusive: false,
        })
    }))
}

fn index_set(key: &str, v: Vec<usize>, d: usize) -> Result<BTreeSet<usize>, CliError> {
    if let Some(bad) = v.iter().find(|&&i| i >= d) {
        return Err(CliError::invalid(format!(
            "{key}: index {bad} outside 0..{d}"
        )));
    }
    Ok(v.into_iter().collect())
}

fn convolution_jauch(p: &mut Params, tol: &Tolerances, _seed: u64) -> Result<Job, CliError> {
    let d = p.usize("d", 8)?;
    let default_pmf = {
        let mut v = vec!["0".to_string(); d.max(2)];
        v[0] = "0.5".into();
        v[1] = "0.25".into();
        v[d.max(2) - 1] = "0.25".into();
        v.join(",")
    };
    let pmf = p.f64_list("pmf", &default_pmf)?;
    let x = index_set("x", p.usize_list("x", "0,1")?, d)?;
    let y = index_set("y", p.usize_list("y", "0")?, d)?;
    let mu = FunctionOnGrid::cyclic(pmf)?;
    let pol = tol.policy()?;
    Ok(Box::new(move || {
        let l = cyclic_lattice(d)?;
        let smeared = lattice_convolution(&mu, &l.position)?;
        let ex = smeared.effect_of(&x)?;
        let support = smeared_support(&x, &mu);
        let bound = below(
            &support_projection(&ex, &pol).into(),
            &l.position_set(&support).into(),
            &pol,
        )?;
        let py: Effect = l.momentum_set(&y).into();
        let smeared_verdict = effects_disjoint(&ex, &py, &pol)?;
        let sharp_verdict = effects_disjoint(&l.position_set(&x).into(), &py, &pol)?;
        Ok(Body {
            values: json!({
                "support_bound_holds": bound,
                "smeared_support": support,
                "support_rank": support_projection(&ex, &pol).rank(),
                "smeared_disjoint_from_momentum": smeared_verdict.disjoint,
                "sharp_disjoint_from_momentum": sharp_verdict.disjoint,
            }),
            certificates: json!({
                "smeared_overlap_cosine": smeared_verdict.overlap_cosine,
                "sharp_overlap_cosine": sharp_verdict.overlap_cosine,
            }),
            series: None,
            inconclusive: false,
        })
    }))
}
