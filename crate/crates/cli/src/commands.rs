use anyhow::{anyhow, Context};
use serde::Deserialize;
use serde_json::{json, Value};
use sumlike_core::catalog::{
    build_example4, example4_grid, example4_ratio, standard_family, verify_example4_inequalities, Example4Spec,
};
use sumlike_core::conditions::{
    classify_trichotomy, compare_moduli_two_sided, mazur_orlicz_check, quasi_constants, ClassifyOptions,
    Linearity, MazurOrliczParams,
};
use sumlike_core::format::sig17;
use sumlike_core::metrization::{metrize, CertificateStatus};
use sumlike_core::model::log_grid;
use sumlike_core::reductions::{
    clamp_reduce, curve_csv, estimate_holder, koch_interleave, koch_point, select_blocks, verify_block_inequality,
    KochParams,
};
use sumlike_core::{Error, FamilyDescription, FunctionSpec, ModulusSample, ToleranceConfig};

/// Exit status classes.
#[derive(Debug)]
pub enum Failure {
    /// Unreadable or invalid input: exit 2.
    Input(anyhow::Error),
    /// The input is well-formed but the mathematics says no: exit 1.
    Verdict(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

/// Core errors that describe the input's mathematics rather than its shape.
fn classify_error(e: Error) -> Failure {
    match e {
        Error::InfiniteConstant { .. } | Error::DiagonalViolation { .. } | Error::StreamExhausted { .. } => {
            Failure::Verdict(e.into())
        }
        other => Failure::Input(other.into()),
    }
}

pub struct Outcome {
    pub result: Value,
    pub verdict: String,
    pub ok: bool,
    pub csv: Option<String>,
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value, Failure> {
    serde_json::to_value(v).map_err(|e| Failure::Input(e.into()))
}

fn parse<'a, T: Deserialize<'a>>(text: &'a str, what: &str) -> Result<T, Failure> {
    serde_json::from_str(text).with_context(|| format!("parsing {what}")).map_err(Failure::Input)
}

/// A family file, a single sample file (one-coordinate family), or a catalog
/// family.
pub enum CheckInput {
    Family(FamilyDescription),
    Sample(ModulusSample),
}

pub fn read_check_input(text: &str) -> Result<CheckInput, Failure> {
    let raw: Value = parse(text, "input JSON")?;
    if raw.get("coords").is_some() {
        Ok(CheckInput::Family(parse(text, "family")?))
    } else {
        Ok(CheckInput::Sample(parse(text, "sample")?))
    }
}

pub fn check(input: CheckInput, against: Option<ModulusSample>, tol: &ToleranceConfig) -> Result<Outcome, Failure> {
    let samples: Vec<ModulusSample> = match &input {
        CheckInput::Sample(s) => vec![s.clone()],
        CheckInput::Family(f) => f
            .coords
            .iter()
            .enumerate()
            .map(|(i, spec)| spec.sample(i, None))
            .collect::<Result<_, _>>()
            .map_err(classify_error)?,
    };
    let mut coords = Vec::with_capacity(samples.len());
    let mut bad = Vec::new();
    let mut worst: f64 = 1.0;
    for (i, s) in samples.iter().enumerate() {
        let q = quasi_constants(s, tol);
        if q.is_quasi_metric() {
            worst = worst.max(q.combined().value());
        } else {
            bad.push(i);
        }
        coords.push(json!({ "coord": i, "points": s.len(), "quasi": to_value(&q)? }));
    }
    let mut result = json!({ "coords": coords });
    if let Some(phi) = against {
        let CheckInput::Sample(psi) = &input else {
            return Err(Failure::Input(anyhow!("--against needs a single sample as input")));
        };
        let a = compare_moduli_two_sided(psi, &phi, tol).map_err(classify_error)?;
        result["comparison"] = json!({ "against": phi.name(), "two_sided_constant": a });
    }
    let ok = bad.is_empty();
    let verdict = if ok {
        format!("quasi-metric on all {} coordinates, max constant {}", samples.len(), sig17(worst))
    } else {
        format!("not equivalence-inducing: quasi-metric inequalities fail at coordinates {bad:?}")
    };
    Ok(Outcome {
        result,
        verdict,
        ok,
        csv: None,
    })
}

pub fn metrize_cmd(sample: &ModulusSample, tol: &ToleranceConfig) -> Result<Outcome, Failure> {
    let cert = metrize(sample, tol).map_err(classify_error)?;
    let ok = cert.status == CertificateStatus::Certified;
    let status = to_value(&cert.status)?;
    let verdict = format!(
        "{}: C = {}, B = {}, p = {}, L = {}",
        status.as_str().unwrap_or("?"),
        sig17(cert.c),
        sig17(cert.b),
        sig17(cert.p),
        cert.max_level
    );
    Ok(Outcome {
        result: to_value(&cert)?,
        verdict,
        ok,
        csv: Some(cert.distance_csv()),
    })
}

pub fn classify(fam: &FamilyDescription, opts: &ClassifyOptions) -> Result<Outcome, Failure> {
    let report = classify_trichotomy(fam, opts).map_err(classify_error)?;
    let branch = to_value(&report.branch)?;
    let verdict = format!(
        "{}: {}",
        branch.as_str().unwrap_or("?"),
        report.narrative.last().cloned().unwrap_or_default()
    );
    let csv = {
        let mut s = String::from("coord,class_count,equivalence\n");
        for r in &report.fn_reports {
            s.push_str(&format!("{},{},{}\n", r.coord, r.class_count, r.is_equivalence()));
        }
        s
    };
    Ok(Outcome {
        result: to_value(&report)?,
        verdict,
        ok: true,
        csv: Some(csv),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClampInput {
    z: Vec<f64>,
    k_min: i64,
    k_max: i64,
}

pub fn reduce_clamp(text: &str) -> Result<Outcome, Failure> {
    let input: ClampInput = parse(text, "clamp input")?;
    let table = clamp_reduce(&input.z, input.k_min..=input.k_max).map_err(classify_error)?;
    let mut csv = String::from("m,k,value\n");
    for (m, row) in table.rows.iter().enumerate() {
        for (i, &v) in row.iter().enumerate() {
            csv.push_str(&format!("{m},{},{}\n", table.k_min + i as i64, sig17(v)));
        }
    }
    Ok(Outcome {
        verdict: format!("clamp table: {} rows over k in [{}, {}]", table.rows.len(), table.k_min, table.k_max),
        result: to_value(&table)?,
        ok: true,
        csv: Some(csv),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BlocksInput {
    streams: Vec<Vec<f64>>,
    #[serde(default)]
    start_level: u32,
    #[serde(default)]
    z: Option<Vec<f64>>,
    #[serde(default)]
    w: Option<Vec<f64>>,
}

pub fn reduce_blocks(text: &str) -> Result<Outcome, Failure> {
    let input: BlocksInput = parse(text, "blocks input")?;
    let plan = select_blocks(&input.streams, input.start_level).map_err(classify_error)?;
    let sizes: Vec<usize> = plan.blocks.iter().map(|b| b.len()).collect();
    let mut result = json!({ "plan": to_value(&plan)? });
    let mut ok = true;
    match (&input.z, &input.w) {
        (Some(z), Some(w)) => {
            let v = verify_block_inequality(z, w, &plan).map_err(classify_error)?;
            ok = v.all_ok;
            result["verification"] = to_value(&v)?;
        }
        (None, None) => {}
        _ => return Err(Failure::Input(anyhow!("`z` and `w` must be given together"))),
    }
    let mut csv = String::from("level,start,end,sum\n");
    for b in &plan.blocks {
        csv.push_str(&format!("{},{},{},{}\n", b.level, b.start, b.end, sig17(b.sum)));
    }
    let verdict = if ok {
        format!("plan of {} block(s), sizes {sizes:?}", plan.blocks.len())
    } else {
        "block inequality violated".to_string()
    };
    Ok(Outcome {
        result,
        verdict,
        ok,
        csv: Some(csv),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KochInput {
    params: KochParams,
    #[serde(default)]
    points: Vec<f64>,
    #[serde(default)]
    pairs: Vec<(f64, f64)>,
    #[serde(default = "default_q")]
    q: f64,
}

fn default_q() -> f64 {
    2.0
}

pub fn reduce_koch(text: &str, tol: &ToleranceConfig) -> Result<Outcome, Failure> {
    let input: KochInput = parse(text, "koch input")?;
    input.params.validate(tol).map_err(classify_error)?;
    let pts = input
        .points
        .iter()
        .map(|&s| koch_point(&input.params, s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(classify_error)?;
    let interleaved = koch_interleave(&input.points, &input.params).map_err(classify_error)?;
    let mut result = json!({ "points": pts, "interleaved": interleaved });
    let mut ok = true;
    let mut verdict = format!("{} curve point(s) at depth {}", pts.len(), input.params.depth);
    if !input.pairs.is_empty() {
        let h = estimate_holder(&input.params, &input.pairs, input.q, tol).map_err(classify_error)?;
        ok = h.m_lower > 0.0 && h.m_upper.is_finite() && h.norm_chain_violations == 0;
        verdict = format!(
            "Hoelder constants over {} pair(s): m' = {}, M' = {}, norm-chain violations {}",
            h.pairs,
            sig17(h.m_lower),
            sig17(h.m_upper),
            h.norm_chain_violations
        );
        result["holder"] = to_value(&h)?;
    }
    Ok(Outcome {
        result,
        verdict,
        ok,
        csv: Some(curve_csv(&input.params, &input.points).map_err(classify_error)?),
    })
}

pub fn example4(spec: Option<Example4Spec>, linear: bool, grid_points: usize, tol: &ToleranceConfig) -> Result<Outcome, Failure> {
    if grid_points < 2 {
        return Err(Failure::Input(anyhow!("--grid-points must be at least 2")));
    }
    let params = MazurOrliczParams::default();
    if linear {
        let f = FunctionSpec::Power { p: 1.0, cap: None };
        let grid = log_grid(1e-6, 0.5, grid_points);
        let mo = mazur_orlicz_check(|t| f.eval(t), &grid, &params, tol).map_err(classify_error)?;
        let verdict = format!("f(t) = t: {}", verdict_word(mo.verdict));
        return Ok(Outcome {
            result: json!({ "function": to_value(&f)?, "mazur_orlicz": to_value(&mo)? }),
            verdict,
            ok: true,
            csv: None,
        });
    }
    let spec = spec.ok_or_else(|| Failure::Input(anyhow!("no Example-4 specification given")))?;
    let f = build_example4(&spec, tol).map_err(classify_error)?;
    let ratios = (0..f.last_index())
        .map(|n| example4_ratio(&f, n, tol))
        .collect::<Result<Vec<_>, _>>()
        .map_err(classify_error)?;
    let grid = example4_grid(&f, grid_points);
    let inequalities = verify_example4_inequalities(|t| f.eval(t), &grid, tol);
    let mo = mazur_orlicz_check(|t| f.eval(t), &grid, &params, tol).map_err(classify_error)?;
    let gaps = f.continuity_gaps();
    let max_gap = gaps.iter().map(|g| (g.left - g.right).abs()).fold(0.0, f64::max);
    let ratios_ok = ratios.iter().all(|r| r.agrees);
    let verdict = format!(
        "(a') {}, (b') {}: {}; ratio identity {} at {} level(s)",
        if mo.a_prime.bounded { "BOUNDED" } else { "UNBOUNDED" },
        if mo.b_prime.bounded { "BOUNDED" } else { "UNBOUNDED" },
        verdict_word(mo.verdict),
        if ratios_ok { "holds" } else { "FAILS" },
        ratios.len()
    );
    let mut csv = String::from("t,f\n");
    for &t in &grid {
        csv.push_str(&format!("{},{}\n", sig17(t), sig17(f.eval(t))));
    }
    Ok(Outcome {
        result: json!({
            "spec": to_value(&spec)?,
            "modulus": to_value(&f)?,
            "max_continuity_gap": max_gap,
            "ratios": to_value(&ratios)?,
            "inequalities": to_value(&inequalities)?,
            "mazur_orlicz": to_value(&mo)?,
        }),
        verdict,
        ok: ratios_ok,
        csv: Some(csv),
    })
}

fn verdict_word(l: Linearity) -> &'static str {
    match l {
        Linearity::LinearLikely => "LINEAR_LIKELY",
        Linearity::NotLinear => "NOT_LINEAR",
    }
}

pub fn catalog_family(name: &str, n: usize) -> Result<FamilyDescription, Failure> {
    standard_family(name, n).map_err(|e| Failure::Input(e.into()))
}
