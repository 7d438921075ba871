//! Line-oriented text format for layouts.
//!
//! ```text
//! # comment
//! layout rarity-tapster
//! element src source
//! element ps_a shifter 0.7
//! element m_a mirror
//! element bs_l beamsplitter            # 50/50 implied; magnitudes may be spelled out
//! element u detector
//! path a left src ps_a m_a via bs_l t>d r>u
//! pair a a'
//! ```
//!
//! One directive per line: `layout <name>`, `element <id> <kind> [args]`,
//! `path <label> <wing> <elem...> via <splitter> t><det> r><det>`, and
//! `pair <left-path> <right-path>`. Traversal roles are implied by the
//! element kind except for mid-path beamsplitters, which must be written
//! `<id>:transmit` or `<id>:reflect`. Beamsplitters accept optional
//! `<|t|> <|r|>` magnitudes and are rejected unless they are 50/50 within
//! `1e-9`. Parsing never panics; every error carries the offending line.

use super::{Element, ElementKind, ExitPorts, Layout, LayoutError, Path, Traversal, TraversalRole, Wing};
use std::f64::consts::FRAC_1_SQRT_2;

/// Tolerance for beamsplitter magnitudes spelled out in a document.
const SPLITTER_TOL: f64 = 1e-9;

/// Errors raised while reading a layout document.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LayoutParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown element kind {kind:?}")]
    UnknownElementKind { line: usize, kind: String },
    #[error("line {line}: unknown {what} {name:?}")]
    UnknownReference { line: usize, what: &'static str, name: String },
    #[error("line {line}: field {field} has invalid number {value:?}")]
    Number { line: usize, field: &'static str, value: String },
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error(transparent)]
    Layout(#[from] LayoutError),
}

fn syntax(line: usize, message: impl Into<String>) -> LayoutParseError {
    LayoutParseError::Syntax { line, message: message.into() }
}

fn parse_finite(line: usize, field: &'static str, raw: &str) -> Result<f64, LayoutParseError> {
    let v: f64 = raw
        .parse()
        .map_err(|_| LayoutParseError::Number { line, field, value: raw.to_string() })?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(LayoutParseError::Number { line, field, value: raw.to_string() })
    }
}

fn check_id(line: usize, id: &str) -> Result<(), LayoutParseError> {
    if id.is_empty() || id.contains([':', '>', '#']) {
        return Err(syntax(line, format!("invalid identifier {id:?}")));
    }
    Ok(())
}

/// Parses a layout document. Inverse of [`to_layout_text`].
pub fn parse_layout_str(input: &str) -> Result<Layout, LayoutParseError> {
    let mut name: Option<String> = None;
    let mut elements: Vec<Element> = Vec::new();
    let mut paths: Vec<Path> = Vec::new();
    // Pair labels resolve after all paths are known.
    let mut pair_lines: Vec<(usize, String, String)> = Vec::new();

    let element_index = |elements: &[Element], id: &str| -> Option<usize> {
        elements.iter().position(|e| e.id == id)
    };

    for (lineno, raw) in input.lines().enumerate() {
        let line = lineno + 1;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let mut tokens = content.split_whitespace();
        let Some(directive) = tokens.next() else { continue };
        match directive {
            "layout" => {
                let n = tokens.next().ok_or_else(|| syntax(line, "layout needs a name"))?;
                if name.replace(n.to_string()).is_some() {
                    return Err(syntax(line, "duplicate layout directive"));
                }
            }
            "element" => {
                let id = tokens.next().ok_or_else(|| syntax(line, "element needs an id"))?;
                check_id(line, id)?;
                if element_index(&elements, id).is_some() {
                    return Err(syntax(line, format!("duplicate element id {id:?}")));
                }
                let kind_name =
                    tokens.next().ok_or_else(|| syntax(line, "element needs a kind"))?;
                let rest: Vec<&str> = tokens.collect();
                let kind = match kind_name {
                    "source" | "mirror" | "detector" => {
                        if !rest.is_empty() {
                            return Err(syntax(
                                line,
                                format!("{kind_name} takes no arguments"),
                            ));
                        }
                        match kind_name {
                            "source" => ElementKind::Source,
                            "mirror" => ElementKind::Mirror,
                            _ => ElementKind::Detector,
                        }
                    }
                    "shifter" => {
                        let [setting] = rest.as_slice() else {
                            return Err(syntax(line, "shifter takes exactly one setting"));
                        };
                        ElementKind::PhaseShifter {
                            setting: parse_finite(line, "setting", setting)?,
                        }
                    }
                    "beamsplitter" => {
                        match rest.as_slice() {
                            [] => {}
                            [t, r] => {
                                let t = parse_finite(line, "|t|", t)?;
                                let r = parse_finite(line, "|r|", r)?;
                                if (t - FRAC_1_SQRT_2).abs() > SPLITTER_TOL
                                    || (r - FRAC_1_SQRT_2).abs() > SPLITTER_TOL
                                {
                                    return Err(LayoutParseError::Schema {
                                        line,
                                        message: format!(
                                            "non-50/50 beamsplitter (|t| = {t}, |r| = {r})"
                                        ),
                                    });
                                }
                            }
                            _ => {
                                return Err(syntax(
                                    line,
                                    "beamsplitter takes zero or two magnitudes",
                                ))
                            }
                        }
                        ElementKind::BeamSplitter
                    }
                    other => {
                        return Err(LayoutParseError::UnknownElementKind {
                            line,
                            kind: other.to_string(),
                        })
                    }
                };
                elements.push(Element { id: id.to_string(), kind });
            }
            "path" => {
                let label = tokens.next().ok_or_else(|| syntax(line, "path needs a label"))?;
                check_id(line, label)?;
                if paths.iter().any(|p| p.label == label) {
                    return Err(syntax(line, format!("duplicate path label {label:?}")));
                }
                let wing = match tokens.next() {
                    Some("left") => Wing::Left,
                    Some("right") => Wing::Right,
                    Some("single") => Wing::Single,
                    Some(other) => {
                        return Err(syntax(line, format!("unknown wing {other:?}")))
                    }
                    None => return Err(syntax(line, "path needs a wing")),
                };
                let rest: Vec<&str> = tokens.collect();
                let via = rest
                    .iter()
                    .position(|t| *t == "via")
                    .ok_or_else(|| syntax(line, "path needs a `via <splitter>` exit clause"))?;
                let mut traversals = Vec::new();
                for token in &rest[..via] {
                    let (id, role) = match token.split_once(':') {
                        Some((id, role)) => (id, Some(role)),
                        None => (*token, None),
                    };
                    let eidx = element_index(&elements, id).ok_or_else(|| {
                        LayoutParseError::UnknownReference {
                            line,
                            what: "element",
                            name: id.to_string(),
                        }
                    })?;
                    let role = match (&elements[eidx].kind, role) {
                        (ElementKind::Source, None) => TraversalRole::Emit,
                        (ElementKind::PhaseShifter { .. }, None) => TraversalRole::Shift,
                        (ElementKind::Mirror, None) => TraversalRole::Reflect,
                        (ElementKind::BeamSplitter, Some("transmit")) => TraversalRole::Transmit,
                        (ElementKind::BeamSplitter, Some("reflect")) => TraversalRole::Reflect,
                        (ElementKind::BeamSplitter, None) => {
                            return Err(syntax(
                                line,
                                format!("beamsplitter {id:?} needs :transmit or :reflect"),
                            ))
                        }
                        (kind, Some(role)) => {
                            return Err(syntax(
                                line,
                                format!("role {role:?} does not apply to {} {id:?}", kind.name()),
                            ))
                        }
                        (ElementKind::Detector, None) => {
                            return Err(syntax(
                                line,
                                format!("detector {id:?} cannot appear mid-path"),
                            ))
                        }
                    };
                    traversals.push(Traversal { element: eidx, role });
                }
                let exit_tokens = &rest[via + 1..];
                let [splitter_id, port_a, port_b] = exit_tokens else {
                    return Err(syntax(line, "exit clause is `via <splitter> t><det> r><det>`"));
                };
                let splitter = element_index(&elements, splitter_id).ok_or_else(|| {
                    LayoutParseError::UnknownReference {
                        line,
                        what: "element",
                        name: splitter_id.to_string(),
                    }
                })?;
                let mut transmit_to = None;
                let mut reflect_to = None;
                for port in [port_a, port_b] {
                    let (tag, det) = port.split_once('>').ok_or_else(|| {
                        syntax(line, format!("malformed exit port {port:?}"))
                    })?;
                    let det_idx = element_index(&elements, det).ok_or_else(|| {
                        LayoutParseError::UnknownReference {
                            line,
                            what: "element",
                            name: det.to_string(),
                        }
                    })?;
                    let slot = match tag {
                        "t" => &mut transmit_to,
                        "r" => &mut reflect_to,
                        other => {
                            return Err(syntax(line, format!("unknown exit port tag {other:?}")))
                        }
                    };
                    if slot.replace(det_idx).is_some() {
                        return Err(syntax(line, format!("duplicate exit port {tag:?}")));
                    }
                }
                let (Some(transmit_to), Some(reflect_to)) = (transmit_to, reflect_to) else {
                    return Err(syntax(line, "exit clause needs both t> and r> ports"));
                };
                paths.push(Path {
                    label: label.to_string(),
                    wing,
                    traversals,
                    exit: ExitPorts { splitter, transmit_to, reflect_to },
                });
            }
            "pair" => {
                let l = tokens.next().ok_or_else(|| syntax(line, "pair needs two labels"))?;
                let r = tokens.next().ok_or_else(|| syntax(line, "pair needs two labels"))?;
                if tokens.next().is_some() {
                    return Err(syntax(line, "pair takes exactly two labels"));
                }
                pair_lines.push((line, l.to_string(), r.to_string()));
            }
            other => return Err(syntax(line, format!("unknown directive {other:?}"))),
        }
    }

    let mut pairs = Vec::new();
    for (line, l, r) in pair_lines {
        let find = |label: &str| {
            paths.iter().position(|p| p.label == label).ok_or_else(|| {
                LayoutParseError::UnknownReference { line, what: "path", name: label.to_string() }
            })
        };
        pairs.push((find(&l)?, find(&r)?));
    }
    Ok(Layout::new(
        name.unwrap_or_else(|| "layout".to_string()),
        elements,
        paths,
        pairs,
    )?)
}

/// Serializes a layout as a text document accepted by [`parse_layout_str`].
pub fn to_layout_text(layout: &Layout) -> String {
    let mut out = String::new();
    out.push_str(&format!("layout {}\n", layout.name()));
    for e in layout.elements() {
        match &e.kind {
            ElementKind::PhaseShifter { setting } => {
                out.push_str(&format!("element {} shifter {}\n", e.id, setting));
            }
            kind => out.push_str(&format!("element {} {}\n", e.id, kind.name())),
        }
    }
    for p in layout.paths() {
        out.push_str(&format!("path {} {}", p.label, p.wing.as_str()));
        for t in &p.traversals {
            let id = layout.element_id(t.element);
            match (&layout.elements()[t.element].kind, t.role) {
                (ElementKind::BeamSplitter, role) => {
                    out.push_str(&format!(" {}:{}", id, role.as_str()));
                }
                _ => out.push_str(&format!(" {id}")),
            }
        }
        out.push_str(&format!(
            " via {} t>{} r>{}\n",
            layout.element_id(p.exit.splitter),
            layout.element_id(p.exit.transmit_to),
            layout.element_id(p.exit.reflect_to),
        ));
    }
    for &(l, r) in layout.correlated_pairs() {
        out.push_str(&format!(
            "pair {} {}\n",
            layout.paths()[l].label,
            layout.paths()[r].label
        ));
    }
    out
}
