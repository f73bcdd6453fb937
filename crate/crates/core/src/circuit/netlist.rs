use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::polysys::DesignSpec;

/// SPICE deck for the designed ladder.
///
/// Node `p{k}` is the top of parasitic capacitor `Cp{k}` (node `0` is ground
/// and plays `p0`). Stage `k` is `L{k}` from `p{k}` to `m{k}` followed by the
/// storage capacitor `C{k}` from `m{k}` (positive plate) down to `p{k-1}`,
/// pre-charged to `v0`. The load branch runs from `p{n}` through `Lload` to
/// `mL` and `Cload` to ground. The simulator's `I(Lload)` is the state `i_L`,
/// which points the opposite way to the stage currents `I(L{k})`.
pub fn netlist(spec: &DesignSpec, k: &[f64], v0: f64) -> Result<String> {
    let n = spec.n();
    if k.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: k.len(),
        });
    }
    if let Some((index, &value)) = k.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::NonPositive { index, value });
    }
    let (c, ell) = (spec.c(), spec.ell());
    let node = |j: usize| if j == 0 { "0".to_string() } else { format!("p{j}") };
    let mut s = String::new();
    let alpha: Vec<String> = spec.alpha().iter().map(u32::to_string).collect();
    writeln!(s, "* Marx generator ladder, n = {n}, alpha = {}", alpha.join(" ")).unwrap();
    writeln!(s, "* I(Lload) is i_L, oriented opposite to the stage currents I(Lk)").unwrap();
    for j in 1..=n {
        writeln!(s, "Cp{j} {} 0 {:.11e}", node(j), c * k[j - 1]).unwrap();
    }
    for j in 1..=n {
        writeln!(s, "L{j} {} m{j} {:.11e}", node(j), ell).unwrap();
        writeln!(s, "C{j} m{j} {} {:.11e} IC={:.11e}", node(j - 1), c, v0).unwrap();
    }
    writeln!(s, "Lload {} mL {:.11e}", node(n), n as f64 * ell).unwrap();
    writeln!(s, "Cload mL 0 {:.11e}", c / n as f64).unwrap();
    let t = spec.transfer_time();
    writeln!(s, ".tran {:.11e} {:.11e} UIC", t / 1000.0, t).unwrap();
    writeln!(s, ".end").unwrap();
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    Capacitor,
    Inductor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub name: String,
    pub kind: ElementKind,
    pub nodes: (String, String),
    pub value: f64,
    pub initial_condition: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParsedNetlist {
    pub elements: Vec<Element>,
    pub commands: Vec<String>,
}

impl ParsedNetlist {
    pub fn count(&self, kind: ElementKind) -> usize {
        self.elements.iter().filter(|e| e.kind == kind).count()
    }

    pub fn get(&self, name: &str) -> Option<&Element> {
        self.elements.iter().find(|e| e.name.eq_ignore_ascii_case(name))
    }
}

/// Minimal syntax check for the L/C subset written by [`netlist`].
pub fn parse_netlist(text: &str) -> Result<ParsedNetlist> {
    let mut out = ParsedNetlist::default();
    let mut ended = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let bad = |what: &str| Error::InvalidArgument(format!("line {}: {what}: {raw:?}", lineno + 1));
        if line.is_empty() || line.starts_with('*') {
            continue;
        }
        if ended {
            return Err(bad("content after .end"));
        }
        if line.starts_with('.') {
            if line.eq_ignore_ascii_case(".end") {
                ended = true;
            }
            out.commands.push(line.to_string());
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 4 {
            return Err(bad("expected name, two nodes and a value"));
        }
        let kind = match fields[0].chars().next().map(|ch| ch.to_ascii_uppercase()) {
            Some('C') => ElementKind::Capacitor,
            Some('L') => ElementKind::Inductor,
            _ => return Err(bad("unsupported element")),
        };
        let value: f64 = fields[3].parse().map_err(|_| bad("bad value"))?;
        if !(value > 0.0 && value.is_finite()) {
            return Err(bad("value must be positive"));
        }
        let mut initial_condition = None;
        for extra in &fields[4..] {
            let Some((key, v)) = extra.split_once('=') else {
                return Err(bad("unexpected token"));
            };
            if !key.eq_ignore_ascii_case("IC") {
                return Err(bad("unknown parameter"));
            }
            initial_condition = Some(v.parse().map_err(|_| bad("bad initial condition"))?);
        }
        if out.get(fields[0]).is_some() {
            return Err(bad("duplicate element name"));
        }
        if fields[1] == fields[2] {
            return Err(bad("element shorted to itself"));
        }
        out.elements.push(Element {
            name: fields[0].to_string(),
            kind,
            nodes: (fields[1].to_string(), fields[2].to_string()),
            value,
            initial_condition,
        });
    }
    if !ended {
        return Err(Error::InvalidArgument("missing .end".into()));
    }
    Ok(out)
}
