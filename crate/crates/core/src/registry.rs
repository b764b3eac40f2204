//! Every check reachable by a string id and a JSON parameter map.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde_json::{Map, Value};

use crate::cremona::{self, RationalMap};
use crate::error::{Error, Result};
use crate::moore::tower_for;
use crate::mpoly::MPoly;
use crate::report::CheckReport;
use crate::{counting, divlat, field, foliation, linsys, moore, Budget};

pub struct CheckSpec {
    pub id: &'static str,
    pub required: &'static [&'static str],
    pub optional: &'static [&'static str],
    /// Small parameters that run quickly; used by the coverage test and `--help` text.
    pub example: &'static str,
}

macro_rules! spec {
    ($id:literal, [$($r:literal),*], [$($o:literal),*], $ex:literal) => {
        CheckSpec { id: $id, required: &[$($r),*], optional: &[$($o),*], example: $ex }
    };
}

pub const CHECKS: &[CheckSpec] = &[
    spec!("moore.identity", ["q", "n"], [], r#"{"q":2,"n":2}"#),
    spec!("moore.partial", ["q", "n"], [], r#"{"q":2,"n":2}"#),
    spec!("moore.strata-dual", ["n", "q", "m"], [], r#"{"n":2,"q":2,"m":2}"#),
    spec!("cremona.graph", ["n", "q"], [], r#"{"n":2,"q":2}"#),
    spec!("cremona.psi-squared", ["n", "q"], [], r#"{"n":2,"q":2}"#),
    spec!("cremona.phi-bar", ["n", "q"], [], r#"{"n":2,"q":2}"#),
    spec!("cremona.omega", ["n", "q", "m"], [], r#"{"n":2,"q":2,"m":3}"#),
    spec!("cremona.indeterminacy", ["n", "q", "m"], [], r#"{"n":2,"q":2,"m":2}"#),
    spec!("cremona.flop", ["q", "m"], [], r#"{"q":2,"m":1}"#),
    spec!(
        "cremona.proj-equal",
        ["q", "n", "f", "g"],
        ["m"],
        r#"{"q":3,"n":1,"f":[[[[1,0],1]],[[[0,1],1]]],"g":[[[[2,0],1]],[[[1,1],1]]]}"#
    ),
    spec!("foliation.bracket", ["n", "q"], [], r#"{"n":2,"q":2}"#),
    spec!("foliation.pclosed", ["q"], [], r#"{"q":2}"#),
    spec!("foliation.saito", ["n", "q"], [], r#"{"n":2,"q":2}"#),
    spec!("foliation.h-identity", ["n", "q"], [], r#"{"n":2,"q":2}"#),
    spec!("foliation.chart-form", ["n", "q"], [], r#"{"n":2,"q":2}"#),
    spec!("foliation.chart-field", ["n", "q", "j"], [], r#"{"n":2,"q":2,"j":1}"#),
    spec!("foliation.splitting", ["q"], [], r#"{"q":2}"#),
    spec!("foliation.psi-omega", ["n", "q"], [], r#"{"n":2,"q":2}"#),
    spec!("lattice.surface", ["q"], [], r#"{"q":2}"#),
    spec!("lattice.pushforward", ["q"], [], r#"{"q":2}"#),
    spec!("lattice.threefold", ["q"], ["p"], r#"{"q":2}"#),
    spec!("lattice.discrepancy", ["m", "d"], [], r#"{"m":1,"d":2}"#),
    spec!("linsys.en-dimension", ["n", "c", "q"], [], r#"{"n":2,"c":2,"q":2}"#),
    spec!("linsys.vanishing", ["q"], [], r#"{"q":2}"#),
    spec!("linsys.serre", ["q", "m"], [], r#"{"q":2,"m":1}"#),
    spec!("linsys.reducibility", ["q", "m"], [], r#"{"q":2,"m":2}"#),
    spec!("linsys.appendix", ["q", "d", "s"], ["m", "points"], r#"{"q":2,"d":3,"s":3}"#),
    spec!("counting.strata", ["n", "q", "m"], [], r#"{"n":2,"q":2,"m":3}"#),
    spec!("counting.flags", ["q", "m"], [], r#"{"q":2,"m":1}"#),
    spec!("counting.b2", ["q"], [], r#"{"q":2}"#),
];

pub fn check_ids() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.id).collect()
}

pub fn lookup(id: &str) -> Result<&'static CheckSpec> {
    CHECKS.iter().find(|c| c.id == id).ok_or_else(|| {
        Error::Usage(format!("unknown check id {id:?}; valid ids: {}", check_ids().join(", ")))
    })
}

fn get_int(params: &Map<String, Value>, key: &str) -> Result<i64> {
    let v = params.get(key).ok_or_else(|| Error::Usage(format!("missing parameter {key:?}")))?;
    v.as_i64()
        .or_else(|| v.as_str().and_then(|s| s.parse().ok()))
        .ok_or_else(|| Error::Usage(format!("parameter {key:?} must be an integer, got {v}")))
}

fn get_u32(params: &Map<String, Value>, key: &str) -> Result<u32> {
    let v = get_int(params, key)?;
    u32::try_from(v).map_err(|_| Error::Usage(format!("parameter {key:?} must be a nonnegative integer, got {v}")))
}

fn get_u32_or(params: &Map<String, Value>, key: &str, default: u32) -> Result<u32> {
    if params.contains_key(key) {
        get_u32(params, key)
    } else {
        Ok(default)
    }
}

fn parse_map(field: &alloc::sync::Arc<field::FieldTower>, nvars: usize, v: &Value) -> Result<RationalMap> {
    let comps = v
        .as_array()
        .ok_or_else(|| Error::Usage("a map is a list of components".into()))?
        .iter()
        .map(|c| MPoly::from_json(field, nvars, c))
        .collect::<Result<Vec<_>>>()?;
    RationalMap::new(comps)
}

fn parse_points(tower: &field::FieldTower, v: &Value) -> Result<Vec<(Vec<field::Fe>, u32)>> {
    let bad = || Error::Usage(format!("points must be a list of {{\"point\": [...], \"mult\": k}}, got {v}"));
    v.as_array()
        .ok_or_else(bad)?
        .iter()
        .map(|entry| {
            let coords = entry.get("point").and_then(Value::as_array).ok_or_else(bad)?;
            let mult = entry.get("mult").and_then(Value::as_u64).ok_or_else(bad)?;
            let pt = coords.iter().map(|c| tower.decode(c)).collect::<Result<Vec<_>>>()?;
            Ok((pt, mult as u32))
        })
        .collect()
}

fn dispatch(id: &str, p: &Map<String, Value>, b: &Budget) -> Result<CheckReport> {
    let u = |k: &str| get_u32(p, k);
    match id {
        "moore.identity" => moore::verify_moore_identity(u("q")?, u("n")?, b),
        "moore.partial" => moore::verify_partial_identity(u("q")?, u("n")?, b),
        "moore.strata-dual" => moore::verify_strata_dual(u("n")?, u("q")?, u("m")?, b),
        "cremona.graph" => cremona::verify_graph_relations(u("n")?, u("q")?, b),
        "cremona.psi-squared" => cremona::verify_psi_squared(u("n")?, u("q")?, b),
        "cremona.phi-bar" => cremona::verify_phi_bar(u("n")?, u("q")?, b),
        "cremona.omega" => cremona::verify_omega_endomorphism(u("n")?, u("q")?, u("m")?, b),
        "cremona.indeterminacy" => cremona::verify_indeterminacy(u("n")?, u("q")?, u("m")?, b),
        "cremona.flop" => cremona::flop_local_model(u("q")?, u("m")?, b),
        "cremona.proj-equal" => {
            let t = tower_for(u("q")?, get_u32_or(p, "m", 1)?, b)?;
            let nvars = u("n")? as usize + 1;
            let f = parse_map(&t, nvars, &p["f"])?;
            let g = parse_map(&t, nvars, &p["g"])?;
            Ok(cremona::verify_proj_equal(&f, &g))
        }
        "foliation.bracket" => foliation::verify_bracket_identity(u("n")?, u("q")?, b),
        "foliation.pclosed" => foliation::verify_p_closed(u("q")?, b),
        "foliation.saito" => foliation::saito_log_tangent_check(u("n")?, u("q")?, b),
        "foliation.h-identity" => foliation::verify_h_identity(u("n")?, u("q")?, b),
        "foliation.chart-form" => foliation::chart_pullback_form(u("n")?, u("q")?, b),
        "foliation.chart-field" => foliation::chart_pullback_field(u("n")?, u("q")?, u("j")?, b),
        "foliation.splitting" => foliation::verify_splitting(u("q")?, b),
        "foliation.psi-omega" => foliation::verify_psi_is_omega(u("n")?, u("q")?, b),
        "lattice.surface" => divlat::verify_surface_ledger(u("q")?),
        "lattice.pushforward" => divlat::verify_pushforward(u("q")?),
        "lattice.threefold" => {
            let q = u("q")?;
            let (pp, _) = field::factor_prime_power(q as u64)
                .ok_or_else(|| Error::Usage(format!("{q} is not a prime power")))?;
            divlat::threefold_ledger(q, get_u32_or(p, "p", pp)?)
        }
        "lattice.discrepancy" => divlat::verify_discrepancy(get_int(p, "m")?, get_int(p, "d")?),
        "linsys.en-dimension" => linsys::en_dimension_check(u("n")?, u("c")?, u("q")?, b),
        "linsys.vanishing" => linsys::vanishing_zero_checks(u("q")?, b),
        "linsys.serre" => linsys::moving_singularity_check(u("q")?, u("m")?, b),
        "linsys.reducibility" => linsys::verify_reducibility(u("q")?, u("m")?, b),
        "linsys.appendix" => {
            let t = tower_for(u("q")?, get_u32_or(p, "m", 1)?, b)?;
            let points = match p.get("points") {
                Some(v) => parse_points(&t, v)?,
                None => linsys::rational_point_configuration(&t)?,
            };
            linsys::imposed_conditions_experiment(u("d")?, &points, u("s")?, &t, b)
        }
        "counting.strata" => counting::verify_stratify_count(u("n")?, u("q")?, u("m")?, b),
        "counting.flags" => counting::verify_fflag_count(u("q")?, u("m")?, b),
        "counting.b2" => counting::verify_betti_b2(u("q")?),
        _ => unreachable!("ids are validated against CHECKS"),
    }
}

/// Runs one check. Usage problems (unknown id, bad or missing parameters) are
/// returned as errors; every other failure becomes an ERROR report.
pub fn run_check(id: &str, params: &Map<String, Value>, budget: &Budget) -> Result<CheckReport> {
    let spec = lookup(id)?;
    for key in spec.required {
        if !params.contains_key(*key) {
            return Err(Error::Usage(format!("{id} needs parameter {key:?}")));
        }
    }
    if let Some(k) = params.keys().find(|k| !spec.required.contains(&k.as_str()) && !spec.optional.contains(&k.as_str())) {
        return Err(Error::Usage(format!("{id} does not take parameter {k:?}")));
    }
    match dispatch(id, params, budget) {
        Ok(mut r) => {
            for (k, v) in params {
                r.params.entry(k.clone()).or_insert_with(|| v.clone());
            }
            Ok(r)
        }
        Err(e @ Error::Usage(_)) => Err(e),
        Err(e) => Ok(CheckReport::error(id, params.clone(), &e)),
    }
}

pub fn example_params(spec: &CheckSpec) -> Map<String, Value> {
    match serde_json::from_str(spec.example) {
        Ok(Value::Object(m)) => m,
        _ => panic!("example params of {} are not a JSON object", spec.id),
    }
}
