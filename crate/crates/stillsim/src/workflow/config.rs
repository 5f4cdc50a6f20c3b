//! The two XML configuration files.
//!
//! The property file carries pure-component correlations and the binary
//! interaction matrix; the plant file carries the equipment description
//! plus one block per scenario with controls, initial conditions and
//! annotated perturbations. Both parse into the library types and
//! serialize back canonically (fixed element and attribute order), so
//! `parse(serialize(parse(text)))` is the identity on the parsed values.
//!
//! Schemas are documented in the guide chapter on file formats.

use std::fmt::Write as _;
use std::path::Path;

use roxmltree::{Document, Node};

use super::{Scenario, ScenarioReport, WorkflowError};
use crate::anomaly::{build_trajectory, AnomalyAnnotation, ControlTarget};
use crate::column::{ControlInputs, PlantParams};
use crate::integrator::IntegratorConfig;
use crate::thermo::{
    Antoine, BinaryNrtl, Composition, CpPolynomial, MixtureModel, PureComponent, Watson,
};

/// Everything a configuration pair resolves to.
#[derive(Debug)]
pub struct ParsedConfig {
    pub scenarios: Vec<Scenario>,
    pub mixture: MixtureModel,
    pub reports: Vec<ScenarioReport>,
}

/// Reads and resolves both configuration files.
pub fn parse_config(plant_path: &Path, property_path: &Path) -> Result<ParsedConfig, WorkflowError> {
    let property_text =
        std::fs::read_to_string(property_path).map_err(|e| WorkflowError::io(property_path, e))?;
    let mixture = parse_properties(&property_text, &property_path.display().to_string())?;
    let plant_text =
        std::fs::read_to_string(plant_path).map_err(|e| WorkflowError::io(plant_path, e))?;
    let (scenarios, reports) = parse_plant_config(
        &plant_text,
        &mixture,
        &plant_path.display().to_string(),
        &property_path.display().to_string(),
    )?;
    Ok(ParsedConfig { scenarios, mixture, reports })
}

fn parse_err(origin: &str, node: Option<&Node>, message: impl Into<String>) -> WorkflowError {
    let message = match node {
        Some(n) => format!("<{}>: {}", n.tag_name().name(), message.into()),
        None => message.into(),
    };
    WorkflowError::Parse { path: origin.to_string(), message }
}

fn req_attr<'a>(origin: &str, node: &Node<'a, '_>, name: &str) -> Result<&'a str, WorkflowError> {
    node.attribute(name)
        .ok_or_else(|| parse_err(origin, Some(node), format!("missing attribute '{name}'")))
}

fn attr_f64(origin: &str, node: &Node, name: &str) -> Result<f64, WorkflowError> {
    req_attr(origin, node, name)?.trim().parse::<f64>().map_err(|e| {
        parse_err(origin, Some(node), format!("attribute '{name}' is not a number: {e}"))
    })
}

fn opt_attr_f64(origin: &str, node: &Node, name: &str) -> Result<Option<f64>, WorkflowError> {
    match node.attribute(name) {
        None => Ok(None),
        Some(raw) => raw.trim().parse::<f64>().map(Some).map_err(|e| {
            parse_err(origin, Some(node), format!("attribute '{name}' is not a number: {e}"))
        }),
    }
}

fn attr_usize(origin: &str, node: &Node, name: &str) -> Result<usize, WorkflowError> {
    req_attr(origin, node, name)?.trim().parse::<usize>().map_err(|e| {
        parse_err(origin, Some(node), format!("attribute '{name}' is not an integer: {e}"))
    })
}

fn attr_bool(origin: &str, node: &Node, name: &str) -> Result<bool, WorkflowError> {
    match req_attr(origin, node, name)? {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(parse_err(origin, Some(node), format!("attribute '{name}': expected true/false, got '{other}'"))),
    }
}

fn child<'a, 'i>(
    origin: &str,
    node: &Node<'a, 'i>,
    name: &str,
) -> Result<Node<'a, 'i>, WorkflowError> {
    node.children()
        .find(|c| c.has_tag_name(name))
        .ok_or_else(|| parse_err(origin, Some(node), format!("missing element <{name}>")))
}

fn f64_list(origin: &str, node: &Node, raw: &str) -> Result<Vec<f64>, WorkflowError> {
    raw.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>().map_err(|e| {
                parse_err(origin, Some(node), format!("'{tok}' is not a number: {e}"))
            })
        })
        .collect()
}

// ---- property file ----

/// Parses the property XML into a mixture model. Unit attributes are
/// checked literally: the schema fixes one basis per correlation and
/// anything else is a validation error, not a conversion request.
pub fn parse_properties(text: &str, origin: &str) -> Result<MixtureModel, WorkflowError> {
    let doc = Document::parse(text)
        .map_err(|e| parse_err(origin, None, format!("not well-formed XML: {e}")))?;
    let root = doc.root_element();
    if !root.has_tag_name("properties") {
        return Err(parse_err(origin, Some(&root), "expected root element <properties>"));
    }
    let t_ref = attr_f64(origin, &root, "reference_temperature")?;

    let mut components = Vec::new();
    for node in root.children().filter(|n| n.has_tag_name("component")) {
        let name = req_attr(origin, &node, "name")?.to_string();
        let molar_mass = attr_f64(origin, &node, "molar_mass")?;
        let t_range = (attr_f64(origin, &node, "tmin")?, attr_f64(origin, &node, "tmax")?);

        let antoine_node = child(origin, &node, "antoine")?;
        for (attr, expected) in [("form", "log10"), ("punit", "Pa"), ("tunit", "K")] {
            let got = req_attr(origin, &antoine_node, attr)?;
            if got != expected {
                return Err(parse_err(
                    origin,
                    Some(&antoine_node),
                    format!("unsupported {attr} '{got}' for component '{name}', expected '{expected}'"),
                ));
            }
        }
        let antoine = Antoine {
            a: attr_f64(origin, &antoine_node, "a")?,
            b: attr_f64(origin, &antoine_node, "b")?,
            c: attr_f64(origin, &antoine_node, "c")?,
        };

        let cp_node = child(origin, &node, "cp_liquid")?;
        let cp_unit = req_attr(origin, &cp_node, "unit")?;
        if cp_unit != "J/mol/K" {
            return Err(parse_err(
                origin,
                Some(&cp_node),
                format!("unsupported cp unit '{cp_unit}', expected 'J/mol/K'"),
            ));
        }
        let coeffs = f64_list(origin, &cp_node, req_attr(origin, &cp_node, "coeffs")?)?;
        if coeffs.is_empty() {
            return Err(parse_err(origin, Some(&cp_node), "empty coefficient list"));
        }

        let dh_node = child(origin, &node, "dh_vap")?;
        for (attr, expected) in [("form", "watson"), ("unit", "J/mol")] {
            let got = req_attr(origin, &dh_node, attr)?;
            if got != expected {
                return Err(parse_err(
                    origin,
                    Some(&dh_node),
                    format!("unsupported {attr} '{got}', expected '{expected}'"),
                ));
            }
        }
        let dh_vap = Watson {
            dh_scale: attr_f64(origin, &dh_node, "dh_scale")?,
            t_crit: attr_f64(origin, &dh_node, "t_crit")?,
            exponent: attr_f64(origin, &dh_node, "exponent")?,
        };

        components.push(PureComponent {
            name,
            antoine,
            cp_liquid: CpPolynomial::new(coeffs),
            dh_vap,
            t_range,
            molar_mass,
        });
    }

    let binary_node = child(origin, &root, "binary_params")?;
    let model = req_attr(origin, &binary_node, "model")?;
    if model != "nrtl" {
        return Err(parse_err(
            origin,
            Some(&binary_node),
            format!("unsupported activity model '{model}', expected 'nrtl'"),
        ));
    }
    let mut pairs = Vec::new();
    for node in binary_node.children().filter(|n| n.has_tag_name("pair")) {
        pairs.push((
            req_attr(origin, &node, "i")?.to_string(),
            req_attr(origin, &node, "j")?.to_string(),
            BinaryNrtl {
                a_ij: attr_f64(origin, &node, "a_ij")?,
                a_ji: attr_f64(origin, &node, "a_ji")?,
                b_ij: attr_f64(origin, &node, "b_ij")?,
                b_ji: attr_f64(origin, &node, "b_ji")?,
                alpha: attr_f64(origin, &node, "alpha")?,
            },
        ));
    }

    MixtureModel::new(components, &pairs, t_ref)
        .map_err(|e| parse_err(origin, None, e.to_string()))
}

fn esc(value: &str) -> String {
    value
        .replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Canonical serialization of a mixture model back to property XML.
pub fn serialize_properties(m: &MixtureModel) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(out, "<properties reference_temperature=\"{}\">", m.reference_temperature());
    for c in m.components() {
        let _ = writeln!(
            out,
            "  <component name=\"{}\" molar_mass=\"{}\" tmin=\"{}\" tmax=\"{}\">",
            esc(&c.name),
            c.molar_mass,
            c.t_range.0,
            c.t_range.1
        );
        let _ = writeln!(
            out,
            "    <antoine form=\"log10\" punit=\"Pa\" tunit=\"K\" a=\"{}\" b=\"{}\" c=\"{}\"/>",
            c.antoine.a, c.antoine.b, c.antoine.c
        );
        let coeffs: Vec<String> = c.cp_liquid.coeffs().iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "    <cp_liquid unit=\"J/mol/K\" coeffs=\"{}\"/>", coeffs.join(" "));
        let _ = writeln!(
            out,
            "    <dh_vap form=\"watson\" unit=\"J/mol\" dh_scale=\"{}\" t_crit=\"{}\" exponent=\"{}\"/>",
            c.dh_vap.dh_scale, c.dh_vap.t_crit, c.dh_vap.exponent
        );
        out.push_str("  </component>\n");
    }
    out.push_str("  <binary_params model=\"nrtl\">\n");
    let comps = m.components();
    for i in 0..comps.len() {
        for j in i + 1..comps.len() {
            let p = m.nrtl().pair(i, j);
            let _ = writeln!(
                out,
                "    <pair i=\"{}\" j=\"{}\" a_ij=\"{}\" a_ji=\"{}\" b_ij=\"{}\" b_ji=\"{}\" alpha=\"{}\"/>",
                esc(&comps[i].name),
                esc(&comps[j].name),
                p.a_ij,
                p.a_ji,
                p.b_ij,
                p.b_ji,
                p.alpha
            );
        }
    }
    out.push_str("  </binary_params>\n</properties>\n");
    out
}

// ---- plant / scenario file ----

fn target_name(target: ControlTarget) -> &'static str {
    match target {
        ControlTarget::EffluxRatio => "efflux_ratio",
        ControlTarget::HeatDuty => "heat_duty",
        ControlTarget::HeadPressure => "head_pressure",
        ControlTarget::CondenserOffset => "condenser_offset",
        ControlTarget::Withdrawal(_) => "withdrawal",
    }
}

fn parse_target(
    origin: &str,
    node: &Node,
    raw: &str,
) -> Result<ControlTarget, WorkflowError> {
    match raw {
        "efflux_ratio" => Ok(ControlTarget::EffluxRatio),
        "heat_duty" => Ok(ControlTarget::HeatDuty),
        "head_pressure" => Ok(ControlTarget::HeadPressure),
        "condenser_offset" => Ok(ControlTarget::CondenserOffset),
        "withdrawal" => {
            let stage = match node.attribute("stage") {
                Some(_) => attr_usize(origin, node, "stage")?,
                None => 1,
            };
            if stage == 0 {
                return Err(parse_err(origin, Some(node), "stage numbers are one-based"));
            }
            Ok(ControlTarget::Withdrawal(stage - 1))
        }
        other => Err(parse_err(origin, Some(node), format!("unknown target '{other}'"))),
    }
}

/// Parses the plant/scenario XML against an already-resolved mixture.
/// Returns the scenarios plus one report per scenario listing annotations
/// that were skipped (not mappable or flagged not-simulated).
pub fn parse_plant_config(
    text: &str,
    mixture: &MixtureModel,
    origin: &str,
    mixture_ref: &str,
) -> Result<(Vec<Scenario>, Vec<ScenarioReport>), WorkflowError> {
    let doc = Document::parse(text)
        .map_err(|e| parse_err(origin, None, format!("not well-formed XML: {e}")))?;
    let root = doc.root_element();
    if !root.has_tag_name("plant_config") {
        return Err(parse_err(origin, Some(&root), "expected root element <plant_config>"));
    }

    let plant_node = child(origin, &root, "plant")?;
    let plant_id = req_attr(origin, &plant_node, "id")?.to_string();
    let system = req_attr(origin, &plant_node, "system")?.to_string();
    let caps = child(origin, &plant_node, "heat_capacities")?;
    let stages_node = child(origin, &plant_node, "stages")?;
    let stages = attr_usize(origin, &stages_node, "count")?;
    if stages < 2 {
        return Err(parse_err(origin, Some(&stages_node), "need at least 2 stages"));
    }

    let defaults = child(origin, &stages_node, "defaults")?;
    let mut m_steel = vec![attr_f64(origin, &defaults, "m_steel")?; stages];
    let mut m_glass = vec![attr_f64(origin, &defaults, "m_glass")?; stages];
    let mut correction = vec![attr_f64(origin, &defaults, "c")?; stages];
    let mut q_loss = vec![attr_f64(origin, &defaults, "q_loss")?; stages];
    for node in stages_node.children().filter(|n| n.has_tag_name("stage")) {
        let index = attr_usize(origin, &node, "index")?;
        if index == 0 || index > stages {
            return Err(parse_err(
                origin,
                Some(&node),
                format!("stage index {index} out of range 1..={stages}"),
            ));
        }
        let j = index - 1;
        if let Some(v) = opt_attr_f64(origin, &node, "m_steel")? {
            m_steel[j] = v;
        }
        if let Some(v) = opt_attr_f64(origin, &node, "m_glass")? {
            m_glass[j] = v;
        }
        if let Some(v) = opt_attr_f64(origin, &node, "c")? {
            correction[j] = v;
        }
        if let Some(v) = opt_attr_f64(origin, &node, "q_loss")? {
            q_loss[j] = v;
        }
    }

    let plant = PlantParams {
        stages,
        m_steel,
        m_glass,
        cp_steel: attr_f64(origin, &caps, "steel")?,
        cp_glass: attr_f64(origin, &caps, "glass")?,
        correction,
        t_ref: attr_f64(origin, &plant_node, "t_ref")?,
        q_loss,
        dt_condenser: attr_f64(origin, &plant_node, "dt_condenser")?,
        n_hold: attr_f64(origin, &plant_node, "n_hold")?,
        n_buffer: attr_f64(origin, &plant_node, "n_buffer")?,
        reboiler_loss_coeff: opt_attr_f64(origin, &plant_node, "reboiler_loss_coeff")?
            .unwrap_or(0.0),
        ambient_temperature: opt_attr_f64(origin, &plant_node, "ambient_temperature")?
            .unwrap_or(298.15),
    };
    plant.validate()?;

    let scenarios_node = child(origin, &root, "scenarios")?;
    let mut scenarios = Vec::new();
    let mut reports = Vec::new();
    for node in scenarios_node.children().filter(|n| n.has_tag_name("scenario")) {
        let id = req_attr(origin, &node, "id")?.to_string();
        let horizon = attr_f64(origin, &node, "horizon")?;

        let controls_node = child(origin, &node, "controls")?;
        let baseline = ControlInputs {
            efflux_ratio: attr_f64(origin, &controls_node, "efflux_ratio")?,
            head_pressure: attr_f64(origin, &controls_node, "head_pressure")?,
            pressure_drop: attr_f64(origin, &controls_node, "pressure_drop")?,
            heat_duty: attr_f64(origin, &controls_node, "heat_duty")?,
            condenser_offset: opt_attr_f64(origin, &controls_node, "condenser_offset")?,
            withdrawal: vec![0.0; stages],
        };

        let initial_node = child(origin, &node, "initial")?;
        let x1_raw = f64_list(origin, &initial_node, req_attr(origin, &initial_node, "x1")?)?;
        if x1_raw.len() != mixture.n_components() {
            return Err(parse_err(
                origin,
                Some(&initial_node),
                format!(
                    "scenario '{id}': x1 has {} entries for a {}-component property file",
                    x1_raw.len(),
                    mixture.n_components()
                ),
            ));
        }
        let x1_0 = Composition::new(x1_raw)
            .map_err(|e| parse_err(origin, Some(&initial_node), e.to_string()))?;
        let n_app_0 = attr_f64(origin, &initial_node, "n_app")?;

        let mut integrator = IntegratorConfig::default();
        if let Some(cfg_node) = node.children().find(|n| n.has_tag_name("integrator")) {
            let get = |name: &str| opt_attr_f64(origin, &cfg_node, name);
            integrator.dt_init = get("dt_init")?.unwrap_or(integrator.dt_init);
            integrator.dt_min = get("dt_min")?.unwrap_or(integrator.dt_min);
            integrator.dt_max = get("dt_max")?.unwrap_or(integrator.dt_max);
            integrator.newton_tol = get("newton_tol")?.unwrap_or(integrator.newton_tol);
            integrator.sample_interval =
                get("sample_interval")?.unwrap_or(integrator.sample_interval);
            integrator.depletion_threshold =
                get("depletion_threshold")?.unwrap_or(integrator.depletion_threshold);
            if cfg_node.attribute("newton_max_iter").is_some() {
                integrator.newton_max_iter = attr_usize(origin, &cfg_node, "newton_max_iter")?;
            }
        }
        integrator.validate().map_err(|m| parse_err(origin, Some(&node), m))?;

        let mut annotations = Vec::new();
        if let Some(pert_node) = node.children().find(|n| n.has_tag_name("perturbations")) {
            for pn in pert_node.children().filter(|n| n.has_tag_name("perturbation")) {
                let target = match pn.attribute("target") {
                    Some(raw) => Some(parse_target(origin, &pn, raw)?),
                    None => None,
                };
                let cause = pn.attribute("cause").unwrap_or("").to_string();
                if target.is_none() && cause.is_empty() {
                    return Err(parse_err(
                        origin,
                        Some(&pn),
                        "perturbation needs a 'target' or a 'cause' attribute",
                    ));
                }
                annotations.push(AnomalyAnnotation {
                    anomaly_id: req_attr(origin, &pn, "anomaly_id")?.to_string(),
                    cause,
                    target,
                    t_start: attr_f64(origin, &pn, "t_start")?,
                    t_end: attr_f64(origin, &pn, "t_end")?,
                    value: attr_f64(origin, &pn, "value")?,
                    ramp_up: opt_attr_f64(origin, &pn, "ramp_up")?,
                    ramp_down: opt_attr_f64(origin, &pn, "ramp_down")?,
                    simulated: attr_bool(origin, &pn, "simulated")?,
                });
            }
        }

        let (controls, rejected) = build_trajectory(baseline, &annotations)?;
        let scenario = Scenario {
            id: id.clone(),
            plant_id: plant_id.clone(),
            system: system.clone(),
            plant: plant.clone(),
            mixture_ref: mixture_ref.to_string(),
            controls,
            annotations,
            x1_0,
            n_app_0,
            horizon,
            integrator,
        };
        scenario.validate(mixture)?;
        scenarios.push(scenario);
        reports.push(ScenarioReport { scenario_id: id, rejected });
    }

    if scenarios.is_empty() {
        return Err(parse_err(origin, Some(&scenarios_node), "no scenarios defined"));
    }
    Ok((scenarios, reports))
}

/// Canonical serialization of scenarios sharing one plant back to XML.
pub fn serialize_plant_config(scenarios: &[Scenario]) -> Result<String, WorkflowError> {
    let first = scenarios
        .first()
        .ok_or_else(|| WorkflowError::Validation("no scenarios to serialize".into()))?;
    if scenarios.iter().any(|s| s.plant != first.plant || s.plant_id != first.plant_id) {
        return Err(WorkflowError::Validation(
            "scenarios in one document must share the same plant".into(),
        ));
    }
    let p = &first.plant;

    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<plant_config>\n");
    let _ = writeln!(
        out,
        "  <plant id=\"{}\" system=\"{}\" t_ref=\"{}\" dt_condenser=\"{}\" n_hold=\"{}\" \
         n_buffer=\"{}\" reboiler_loss_coeff=\"{}\" ambient_temperature=\"{}\">",
        esc(&first.plant_id),
        esc(&first.system),
        p.t_ref,
        p.dt_condenser,
        p.n_hold,
        p.n_buffer,
        p.reboiler_loss_coeff,
        p.ambient_temperature
    );
    let _ = writeln!(
        out,
        "    <heat_capacities steel=\"{}\" glass=\"{}\"/>",
        p.cp_steel, p.cp_glass
    );
    let _ = writeln!(out, "    <stages count=\"{}\">", p.stages);
    // defaults from the non-reboiler pattern, explicit overrides per stage
    let dflt = (p.m_steel[1], p.m_glass[1], p.correction[1], p.q_loss[1]);
    let _ = writeln!(
        out,
        "      <defaults m_steel=\"{}\" m_glass=\"{}\" c=\"{}\" q_loss=\"{}\"/>",
        dflt.0, dflt.1, dflt.2, dflt.3
    );
    for j in 0..p.stages {
        let tuple = (p.m_steel[j], p.m_glass[j], p.correction[j], p.q_loss[j]);
        if tuple != dflt {
            let _ = writeln!(
                out,
                "      <stage index=\"{}\" m_steel=\"{}\" m_glass=\"{}\" c=\"{}\" q_loss=\"{}\"/>",
                j + 1,
                tuple.0,
                tuple.1,
                tuple.2,
                tuple.3
            );
        }
    }
    out.push_str("    </stages>\n  </plant>\n  <scenarios>\n");

    for s in scenarios {
        let _ = writeln!(out, "    <scenario id=\"{}\" horizon=\"{}\">", esc(&s.id), s.horizon);
        let b = s.controls.baseline();
        let mut controls_attrs = format!(
            "efflux_ratio=\"{}\" head_pressure=\"{}\" pressure_drop=\"{}\" heat_duty=\"{}\"",
            b.efflux_ratio, b.head_pressure, b.pressure_drop, b.heat_duty
        );
        if let Some(dt) = b.condenser_offset {
            let _ = write!(controls_attrs, " condenser_offset=\"{dt}\"");
        }
        let _ = writeln!(out, "      <controls {controls_attrs}/>");
        let x1: Vec<String> = s.x1_0.fractions().iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "      <initial x1=\"{}\" n_app=\"{}\"/>", x1.join(" "), s.n_app_0);
        let cfg = &s.integrator;
        let _ = writeln!(
            out,
            "      <integrator dt_init=\"{}\" dt_min=\"{}\" dt_max=\"{}\" newton_tol=\"{}\" \
             newton_max_iter=\"{}\" sample_interval=\"{}\" depletion_threshold=\"{}\"/>",
            cfg.dt_init,
            cfg.dt_min,
            cfg.dt_max,
            cfg.newton_tol,
            cfg.newton_max_iter,
            cfg.sample_interval,
            cfg.depletion_threshold
        );
        if !s.annotations.is_empty() {
            out.push_str("      <perturbations>\n");
            for a in &s.annotations {
                let mut attrs = format!("anomaly_id=\"{}\"", esc(&a.anomaly_id));
                if let Some(target) = a.target {
                    let _ = write!(attrs, " target=\"{}\"", target_name(target));
                    if let ControlTarget::Withdrawal(stage) = target {
                        let _ = write!(attrs, " stage=\"{}\"", stage + 1);
                    }
                }
                if !a.cause.is_empty() {
                    let _ = write!(attrs, " cause=\"{}\"", esc(&a.cause));
                }
                let _ = write!(
                    attrs,
                    " simulated=\"{}\" t_start=\"{}\" t_end=\"{}\" value=\"{}\"",
                    a.simulated, a.t_start, a.t_end, a.value
                );
                if let Some(r) = a.ramp_up {
                    let _ = write!(attrs, " ramp_up=\"{r}\"");
                }
                if let Some(r) = a.ramp_down {
                    let _ = write!(attrs, " ramp_down=\"{r}\"");
                }
                let _ = writeln!(out, "        <perturbation {attrs}/>");
            }
            out.push_str("      </perturbations>\n");
        }
        out.push_str("    </scenario>\n");
    }
    out.push_str("  </scenarios>\n</plant_config>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::butanol_2propanol_water;

    #[test]
    fn properties_roundtrip_through_serialization() {
        let m = butanol_2propanol_water();
        let xml = serialize_properties(&m);
        let back = parse_properties(&xml, "inline").unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn properties_reject_unit_mismatch() {
        let m = butanol_2propanol_water();
        let xml = serialize_properties(&m).replace("punit=\"Pa\"", "punit=\"mmHg\"");
        match parse_properties(&xml, "inline") {
            Err(WorkflowError::Parse { message, .. }) => assert!(message.contains("mmHg")),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn properties_reject_missing_pair() {
        let m = butanol_2propanol_water();
        let xml = serialize_properties(&m);
        // drop one pair element entirely
        let mangled: String =
            xml.lines().filter(|l| !l.contains("i=\"2-propanol\" j=\"water\"")).collect::<Vec<_>>().join("\n");
        assert!(parse_properties(&mangled, "inline").is_err());
    }
}
