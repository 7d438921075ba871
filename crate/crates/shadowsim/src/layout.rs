//! Declarative interferometer layouts.
//!
//! A [`Layout`] is an immutable description of optical elements and of the
//! labelled paths a particle can take from the source to a detector. Each
//! traversal of an element contributes one amplitude factor:
//!
//! | element / role          | factor  |
//! |-------------------------|---------|
//! | source emission         | `1`     |
//! | phase shifter `θ`       | `e^{iθ}`|
//! | mirror                  | `1`     |
//! | beamsplitter, transmit  | `1/√2`  |
//! | beamsplitter, reflect   | `i/√2`  |
//!
//! Beamsplitters are always 50/50 and mirrors contribute unit factor; any
//! fixed mirror phase common to a wing cancels in every probability (covered
//! by a test, not assumed silently). Every builder gives each path its own
//! phase-shifter slot (default setting 0), so congruence of two paths can be
//! decided by comparing their factor sequences element by element.
//!
//! The two built-in devices are the two-wing coincidence interferometer with
//! phase shifters `α` (left, path `a`) and `β` (right, path `b'`), and a
//! single-particle Mach–Zehnder with phase `φ` on the upper arm.

use std::collections::hash_map::DefaultHasher;
use std::f64::consts::FRAC_1_SQRT_2;
use std::hash::{Hash, Hasher};

use serde::Serialize;

use crate::amplitude::{chain_route, Amplitude, EXACT_TOL};

pub mod text;

/// Which side of a two-wing device a path belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Wing {
    Left,
    Right,
    /// Single-particle device (no wings).
    Single,
}

impl Wing {
    pub fn as_str(&self) -> &'static str {
        match self {
            Wing::Left => "left",
            Wing::Right => "right",
            Wing::Single => "single",
        }
    }
}

/// Kind of optical element.
#[derive(Debug, Clone, PartialEq)]
pub enum ElementKind {
    Source,
    PhaseShifter { setting: f64 },
    Mirror,
    BeamSplitter,
    Detector,
}

impl ElementKind {
    pub fn name(&self) -> &'static str {
        match self {
            ElementKind::Source => "source",
            ElementKind::PhaseShifter { .. } => "shifter",
            ElementKind::Mirror => "mirror",
            ElementKind::BeamSplitter => "beamsplitter",
            ElementKind::Detector => "detector",
        }
    }
}

/// A named optical element.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub id: String,
    pub kind: ElementKind,
}

/// How a path interacts with an element it traverses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraversalRole {
    Emit,
    Shift,
    Reflect,
    Transmit,
}

impl TraversalRole {
    pub fn as_str(&self) -> &'static str {
        match self {
            TraversalRole::Emit => "emit",
            TraversalRole::Shift => "shift",
            TraversalRole::Reflect => "reflect",
            TraversalRole::Transmit => "transmit",
        }
    }
}

/// One step of a path: element index plus port role.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Traversal {
    pub element: usize,
    pub role: TraversalRole,
}

/// The exit beamsplitter of a path and the detectors behind its two ports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitPorts {
    pub splitter: usize,
    pub transmit_to: usize,
    pub reflect_to: usize,
}

/// An ordered traversal from the source to an exit beamsplitter.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub label: String,
    pub wing: Wing,
    pub traversals: Vec<Traversal>,
    pub exit: ExitPorts,
}

/// Immutable interferometer description.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    name: String,
    elements: Vec<Element>,
    paths: Vec<Path>,
    /// Indices of correlated path pairs `(left, right)` emitted together by
    /// the source; empty for single-particle layouts.
    correlated_pairs: Vec<(usize, usize)>,
    /// Fingerprint used to detect mixing of streams across layouts.
    id: u64,
}

/// Errors from layout construction and evaluation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LayoutError {
    #[error("unknown path label {0:?}")]
    UnknownPath(String),
    #[error("unknown detector label {0:?}")]
    UnknownDetector(String),
    #[error("detector {detector:?} is not reachable from path {path:?}")]
    DetectorUnreachable { path: String, detector: String },
    #[error("invalid layout: {0}")]
    Invalid(String),
    #[error(transparent)]
    Amplitude(#[from] crate::amplitude::AmplitudeError),
}

impl Layout {
    /// Validates and seals a layout. All consistency rules live here so the
    /// builders and the text loader share them.
    pub fn new(
        name: impl Into<String>,
        elements: Vec<Element>,
        paths: Vec<Path>,
        correlated_pairs: Vec<(usize, usize)>,
    ) -> Result<Layout, LayoutError> {
        let mut layout =
            Layout { name: name.into(), elements, paths, correlated_pairs, id: 0 };
        layout.validate()?;
        layout.id = layout.fingerprint();
        Ok(layout)
    }

    fn validate(&self) -> Result<(), LayoutError> {
        let invalid = |msg: String| Err(LayoutError::Invalid(msg));
        if self.paths.is_empty() {
            return invalid("layout has no paths".into());
        }
        let mut seen = std::collections::HashSet::new();
        for e in &self.elements {
            if !seen.insert(&e.id) {
                return invalid(format!("duplicate element id {:?}", e.id));
            }
        }
        let mut labels = std::collections::HashSet::new();
        for p in &self.paths {
            if !labels.insert(&p.label) {
                return invalid(format!("duplicate path label {:?}", p.label));
            }
            let Some(first) = p.traversals.first() else {
                return invalid(format!("path {:?} has no traversals", p.label));
            };
            for t in &p.traversals {
                let kind = &self
                    .elements
                    .get(t.element)
                    .ok_or_else(|| {
                        LayoutError::Invalid(format!(
                            "path {:?} references element #{} out of range",
                            p.label, t.element
                        ))
                    })?
                    .kind;
                let ok = matches!(
                    (kind, t.role),
                    (ElementKind::Source, TraversalRole::Emit)
                        | (ElementKind::PhaseShifter { .. }, TraversalRole::Shift)
                        | (ElementKind::Mirror, TraversalRole::Reflect)
                        | (ElementKind::BeamSplitter, TraversalRole::Transmit)
                        | (ElementKind::BeamSplitter, TraversalRole::Reflect)
                );
                if !ok {
                    return invalid(format!(
                        "path {:?}: role {} does not apply to a {}",
                        p.label,
                        t.role.as_str(),
                        kind.name()
                    ));
                }
            }
            if !matches!(self.elements[first.element].kind, ElementKind::Source) {
                return invalid(format!("path {:?} does not begin at a source", p.label));
            }
            let exit = &p.exit;
            if !matches!(
                self.elements.get(exit.splitter).map(|e| &e.kind),
                Some(ElementKind::BeamSplitter)
            ) {
                return invalid(format!(
                    "path {:?} does not terminate at a beamsplitter",
                    p.label
                ));
            }
            for det in [exit.transmit_to, exit.reflect_to] {
                if !matches!(
                    self.elements.get(det).map(|e| &e.kind),
                    Some(ElementKind::Detector)
                ) {
                    return invalid(format!(
                        "path {:?}: exit port does not point at a detector",
                        p.label
                    ));
                }
            }
            if exit.transmit_to == exit.reflect_to {
                return invalid(format!(
                    "path {:?}: both exit ports feed the same detector",
                    p.label
                ));
            }
        }
        let two_wing = self.paths.iter().any(|p| p.wing != Wing::Single);
        if two_wing {
            if self.paths.iter().any(|p| p.wing == Wing::Single) {
                return invalid("layout mixes single and two-wing paths".into());
            }
            // The source is the only element allowed on both wings.
            let wing_elements = |wing: Wing| -> std::collections::HashSet<usize> {
                self.paths
                    .iter()
                    .filter(|p| p.wing == wing)
                    .flat_map(|p| {
                        p.traversals
                            .iter()
                            .map(|t| t.element)
                            .chain([p.exit.splitter, p.exit.transmit_to, p.exit.reflect_to])
                    })
                    .collect()
            };
            for shared in wing_elements(Wing::Left).intersection(&wing_elements(Wing::Right)) {
                if !matches!(self.elements[*shared].kind, ElementKind::Source) {
                    return invalid(format!(
                        "element {:?} is shared across wings",
                        self.elements[*shared].id
                    ));
                }
            }
            if self.correlated_pairs.is_empty() {
                return invalid("two-wing layout has no correlated source pairs".into());
            }
            let mut used = std::collections::HashSet::new();
            for &(l, r) in &self.correlated_pairs {
                for idx in [l, r] {
                    if idx >= self.paths.len() {
                        return invalid("correlated pair references unknown path".into());
                    }
                    if !used.insert(idx) {
                        return invalid(format!(
                            "path {:?} appears in more than one correlated pair",
                            self.paths[idx].label
                        ));
                    }
                }
                if self.paths[l].wing != Wing::Left || self.paths[r].wing != Wing::Right {
                    return invalid("correlated pair must join a left and a right path".into());
                }
            }
            if used.len() != self.paths.len() {
                return invalid("every path must belong to exactly one correlated pair".into());
            }
        } else if !self.correlated_pairs.is_empty() {
            return invalid("single-particle layout cannot declare correlated pairs".into());
        }
        Ok(())
    }

    fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        text::to_layout_text(self).hash(&mut h);
        h.finish()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn correlated_pairs(&self) -> &[(usize, usize)] {
        &self.correlated_pairs
    }

    pub fn is_two_particle(&self) -> bool {
        !self.correlated_pairs.is_empty()
    }

    /// Source normalization for joint amplitudes: `1/√(number of correlated
    /// emission alternatives)`, so the four joint outcome probabilities sum
    /// to one. `1` for single-particle layouts.
    pub fn source_norm(&self) -> f64 {
        if self.correlated_pairs.is_empty() {
            1.0
        } else {
            1.0 / (self.correlated_pairs.len() as f64).sqrt()
        }
    }

    pub fn path_index(&self, label: &str) -> Result<usize, LayoutError> {
        self.paths
            .iter()
            .position(|p| p.label == label)
            .ok_or_else(|| LayoutError::UnknownPath(label.to_string()))
    }

    pub fn path(&self, label: &str) -> Result<&Path, LayoutError> {
        Ok(&self.paths[self.path_index(label)?])
    }

    pub fn detector_index(&self, label: &str) -> Result<usize, LayoutError> {
        self.elements
            .iter()
            .position(|e| e.id == label && matches!(e.kind, ElementKind::Detector))
            .ok_or_else(|| LayoutError::UnknownDetector(label.to_string()))
    }

    /// Detector element indices reachable from paths of `wing`, in first-use
    /// order (stable across runs).
    pub fn detectors_for_wing(&self, wing: Wing) -> Vec<usize> {
        let mut out = Vec::new();
        for p in self.paths.iter().filter(|p| p.wing == wing) {
            for det in [p.exit.transmit_to, p.exit.reflect_to] {
                if !out.contains(&det) {
                    out.push(det);
                }
            }
        }
        out
    }

    pub fn element_id(&self, idx: usize) -> &str {
        &self.elements[idx].id
    }

    /// Amplitude factor contributed by one traversal.
    fn traversal_factor(&self, t: &Traversal) -> Amplitude {
        match (&self.elements[t.element].kind, t.role) {
            (ElementKind::Source, TraversalRole::Emit) => Amplitude::ONE,
            (ElementKind::PhaseShifter { setting }, TraversalRole::Shift) => {
                Amplitude::phase_factor(*setting)
            }
            (ElementKind::Mirror, TraversalRole::Reflect) => Amplitude::ONE,
            (ElementKind::BeamSplitter, TraversalRole::Transmit) => {
                Amplitude::new(FRAC_1_SQRT_2, 0.0)
            }
            (ElementKind::BeamSplitter, TraversalRole::Reflect) => {
                Amplitude::new(0.0, FRAC_1_SQRT_2)
            }
            // Unreachable after validation.
            _ => unreachable!("invalid traversal passed validation"),
        }
    }

    /// Ordered pre-exit factor sequence of a path; the basis for congruence.
    pub fn factor_sequence(&self, path: &Path) -> Vec<Amplitude> {
        path.traversals.iter().map(|t| self.traversal_factor(t)).collect()
    }

    /// Amplitude `⟨detector | path⟩`: product of every factor along the path
    /// including the exit-splitter port factor toward `detector`.
    pub fn path_amplitude(&self, path_label: &str, detector: &str) -> Result<Amplitude, LayoutError> {
        let path = self.path(path_label)?;
        let det = self.detector_index(detector)?;
        let exit_factor = if det == path.exit.transmit_to {
            Amplitude::new(FRAC_1_SQRT_2, 0.0)
        } else if det == path.exit.reflect_to {
            Amplitude::new(0.0, FRAC_1_SQRT_2)
        } else {
            return Err(LayoutError::DetectorUnreachable {
                path: path_label.to_string(),
                detector: detector.to_string(),
            });
        };
        let mut factors = self.factor_sequence(path);
        factors.push(exit_factor);
        Ok(chain_route(&factors)?)
    }

    /// True when two paths accumulate identical factor sequences, compared
    /// element by element (exit ports excluded: congruence is a property of
    /// the paths, not of a detector choice).
    pub fn congruent(&self, path_p: &str, path_q: &str) -> Result<bool, LayoutError> {
        let p = self.factor_sequence(self.path(path_p)?);
        let q = self.factor_sequence(self.path(path_q)?);
        Ok(p.len() == q.len()
            && p.iter().zip(&q).all(|(x, y)| crate::amplitude::distance(*x, *y) <= EXACT_TOL))
    }

    /// Copy of this layout with `delta` radians added to the phase-shifter
    /// slot of one path. The shifter element is cloned first if other paths
    /// share it, so the injection is local to `path_label`.
    pub fn with_extra_phase(&self, path_label: &str, delta: f64) -> Result<Layout, LayoutError> {
        let pidx = self.path_index(path_label)?;
        let mut elements = self.elements.clone();
        let mut paths = self.paths.clone();
        let shift_pos = paths[pidx]
            .traversals
            .iter()
            .position(|t| t.role == TraversalRole::Shift);
        match shift_pos {
            Some(tpos) => {
                let eidx = paths[pidx].traversals[tpos].element;
                let shared = paths.iter().enumerate().any(|(i, p)| {
                    i != pidx && p.traversals.iter().any(|t| t.element == eidx)
                });
                let old = match elements[eidx].kind {
                    ElementKind::PhaseShifter { setting } => setting,
                    _ => unreachable!("shift traversal on non-shifter"),
                };
                if shared {
                    let id = format!("{}_inj", elements[eidx].id);
                    elements.push(Element {
                        id,
                        kind: ElementKind::PhaseShifter { setting: old + delta },
                    });
                    paths[pidx].traversals[tpos].element = elements.len() - 1;
                } else {
                    elements[eidx].kind = ElementKind::PhaseShifter { setting: old + delta };
                }
            }
            None => {
                elements.push(Element {
                    id: format!("inj_{path_label}"),
                    kind: ElementKind::PhaseShifter { setting: delta },
                });
                paths[pidx]
                    .traversals
                    .insert(1, Traversal { element: elements.len() - 1, role: TraversalRole::Shift });
            }
        }
        Layout::new(self.name.clone(), elements, paths, self.correlated_pairs.clone())
    }
}

/// Builds the standard two-wing coincidence interferometer: correlated pairs
/// `(a, a')` and `(b, b')`, phase shifter `alpha` on path `a` (left wing),
/// `beta` on path `b'` (right wing), one exit beamsplitter per wing feeding
/// detectors `u`/`d` on the left and `u'`/`d'` on the right.
pub fn build_rarity_tapster(alpha: f64, beta: f64) -> Layout {
    let mut elements = Vec::new();
    let mut add = |id: &str, kind: ElementKind| {
        elements.push(Element { id: id.to_string(), kind });
        elements.len() - 1
    };
    let src = add("src", ElementKind::Source);
    let ps_a = add("ps_a", ElementKind::PhaseShifter { setting: alpha });
    let ps_b = add("ps_b", ElementKind::PhaseShifter { setting: 0.0 });
    let ps_ap = add("ps_a'", ElementKind::PhaseShifter { setting: 0.0 });
    let ps_bp = add("ps_b'", ElementKind::PhaseShifter { setting: beta });
    let m_a = add("m_a", ElementKind::Mirror);
    let m_b = add("m_b", ElementKind::Mirror);
    let m_ap = add("m_a'", ElementKind::Mirror);
    let m_bp = add("m_b'", ElementKind::Mirror);
    let bs_l = add("bs_l", ElementKind::BeamSplitter);
    let bs_r = add("bs_r", ElementKind::BeamSplitter);
    let det_u = add("u", ElementKind::Detector);
    let det_d = add("d", ElementKind::Detector);
    let det_up = add("u'", ElementKind::Detector);
    let det_dp = add("d'", ElementKind::Detector);

    let arm = |label: &str, wing, shifter, mirror, exit: ExitPorts| Path {
        label: label.to_string(),
        wing,
        traversals: vec![
            Traversal { element: src, role: TraversalRole::Emit },
            Traversal { element: shifter, role: TraversalRole::Shift },
            Traversal { element: mirror, role: TraversalRole::Reflect },
        ],
        exit,
    };
    let paths = vec![
        // ⟨u|a⟩ = e^{iα}·i/√2 (reflect), ⟨d|a⟩ = e^{iα}/√2 (transmit)
        arm("a", Wing::Left, ps_a, m_a, ExitPorts { splitter: bs_l, transmit_to: det_d, reflect_to: det_u }),
        // ⟨u|b⟩ = 1/√2 (transmit), ⟨d|b⟩ = i/√2 (reflect)
        arm("b", Wing::Left, ps_b, m_b, ExitPorts { splitter: bs_l, transmit_to: det_u, reflect_to: det_d }),
        // ⟨u'|a'⟩ = 1/√2 (transmit), ⟨d'|a'⟩ = i/√2 (reflect)
        arm("a'", Wing::Right, ps_ap, m_ap, ExitPorts { splitter: bs_r, transmit_to: det_up, reflect_to: det_dp }),
        // ⟨u'|b'⟩ = e^{iβ}·i/√2 (reflect), ⟨d'|b'⟩ = e^{iβ}/√2 (transmit)
        arm("b'", Wing::Right, ps_bp, m_bp, ExitPorts { splitter: bs_r, transmit_to: det_dp, reflect_to: det_up }),
    ];
    let pairs = vec![(0, 2), (1, 3)];
    Layout::new("rarity-tapster", elements, paths, pairs)
        .expect("built-in coincidence layout is valid")
}

/// Builds a Mach–Zehnder interferometer: two arms between an entry and an
/// exit beamsplitter, phase `phi` on the upper arm, detectors `U` and `D`.
pub fn build_mach_zehnder(phi: f64) -> Layout {
    let mut elements = Vec::new();
    let mut add = |id: &str, kind: ElementKind| {
        elements.push(Element { id: id.to_string(), kind });
        elements.len() - 1
    };
    let src = add("src", ElementKind::Source);
    let bs_in = add("bs_in", ElementKind::BeamSplitter);
    let ps_u = add("ps_up", ElementKind::PhaseShifter { setting: phi });
    let ps_l = add("ps_low", ElementKind::PhaseShifter { setting: 0.0 });
    let m_u = add("m_up", ElementKind::Mirror);
    let m_l = add("m_low", ElementKind::Mirror);
    let bs_out = add("bs_out", ElementKind::BeamSplitter);
    let det_u = add("U", ElementKind::Detector);
    let det_d = add("D", ElementKind::Detector);

    let paths = vec![
        Path {
            label: "upper".to_string(),
            wing: Wing::Single,
            traversals: vec![
                Traversal { element: src, role: TraversalRole::Emit },
                Traversal { element: bs_in, role: TraversalRole::Reflect },
                Traversal { element: ps_u, role: TraversalRole::Shift },
                Traversal { element: m_u, role: TraversalRole::Reflect },
            ],
            exit: ExitPorts { splitter: bs_out, transmit_to: det_u, reflect_to: det_d },
        },
        Path {
            label: "lower".to_string(),
            wing: Wing::Single,
            traversals: vec![
                Traversal { element: src, role: TraversalRole::Emit },
                Traversal { element: bs_in, role: TraversalRole::Transmit },
                Traversal { element: ps_l, role: TraversalRole::Shift },
                Traversal { element: m_l, role: TraversalRole::Reflect },
            ],
            exit: ExitPorts { splitter: bs_out, transmit_to: det_d, reflect_to: det_u },
        },
    ];
    Layout::new("mach-zehnder", elements, paths, vec![])
        .expect("built-in Mach-Zehnder layout is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitude::distance;
    use std::f64::consts::PI;

    fn assert_amp(actual: Amplitude, re: f64, im: f64) {
        let expected = Amplitude::new(re, im);
        assert!(
            distance(actual, expected) <= EXACT_TOL,
            "expected {expected}, got {actual}"
        );
    }

    #[test]
    fn coincidence_braket_table_at_generic_settings() {
        let alpha = 0.7;
        let beta = 1.9;
        let l = build_rarity_tapster(alpha, beta);
        let s = FRAC_1_SQRT_2;
        // Left wing.
        assert_amp(l.path_amplitude("a", "u").unwrap(), -s * alpha.sin(), s * alpha.cos());
        assert_amp(l.path_amplitude("a", "d").unwrap(), s * alpha.cos(), s * alpha.sin());
        assert_amp(l.path_amplitude("b", "u").unwrap(), s, 0.0);
        assert_amp(l.path_amplitude("b", "d").unwrap(), 0.0, s);
        // Right wing.
        assert_amp(l.path_amplitude("a'", "u'").unwrap(), s, 0.0);
        assert_amp(l.path_amplitude("a'", "d'").unwrap(), 0.0, s);
        assert_amp(l.path_amplitude("b'", "u'").unwrap(), -s * beta.sin(), s * beta.cos());
        assert_amp(l.path_amplitude("b'", "d'").unwrap(), s * beta.cos(), s * beta.sin());
    }

    #[test]
    fn coincidence_layout_has_eight_brakets() {
        let l = build_rarity_tapster(0.3, 0.4);
        let mut n = 0;
        for (paths, dets) in [(["a", "b"], ["u", "d"]), (["a'", "b'"], ["u'", "d'"])] {
            for p in paths {
                for d in dets {
                    assert!(l.path_amplitude(p, d).is_ok());
                    n += 1;
                }
            }
        }
        assert_eq!(n, 8);
        assert_eq!(l.paths().len(), 4);
        assert_eq!(l.correlated_pairs().len(), 2);
    }

    #[test]
    fn braket_at_pi_settings() {
        let l = build_rarity_tapster(PI, PI);
        // ⟨u|a⟩ = (1/√2)·e^{iπ}·i = −i/√2
        assert_amp(l.path_amplitude("a", "u").unwrap(), 0.0, -FRAC_1_SQRT_2);
    }

    #[test]
    fn cross_wing_detector_is_unreachable() {
        let l = build_rarity_tapster(0.0, 0.0);
        let err = l.path_amplitude("a", "u'").unwrap_err();
        assert!(matches!(err, LayoutError::DetectorUnreachable { .. }));
    }

    #[test]
    fn default_congruences() {
        let l = build_rarity_tapster(0.0, 0.0);
        assert!(l.congruent("b", "a'").unwrap());
        assert!(l.congruent("a", "a'").unwrap(), "all shifters zero");
        assert!(l.congruent("a", "a").unwrap(), "reflexive");
    }

    #[test]
    fn shifter_breaks_congruence() {
        let l = build_rarity_tapster(0.4, 0.0);
        assert!(!l.congruent("a", "a'").unwrap());
        assert!(l.congruent("b", "a'").unwrap(), "inner arms carry no setting");
    }

    #[test]
    fn injected_phase_breaks_congruence_locally() {
        let l = build_rarity_tapster(0.0, 0.0).with_extra_phase("b", 0.3).unwrap();
        assert!(!l.congruent("b", "a'").unwrap());
        assert!(l.congruent("a", "a'").unwrap(), "other paths untouched");
    }

    #[test]
    fn mach_zehnder_interference() {
        for phi in [0.0, 0.4, PI / 2.0, PI, 4.5] {
            let l = build_mach_zehnder(phi);
            let a_u = crate::amplitude::sum_alternatives(&[
                l.path_amplitude("upper", "U").unwrap(),
                l.path_amplitude("lower", "U").unwrap(),
            ])
            .unwrap();
            let a_d = crate::amplitude::sum_alternatives(&[
                l.path_amplitude("upper", "D").unwrap(),
                l.path_amplitude("lower", "D").unwrap(),
            ])
            .unwrap();
            let p_u = a_u.norm_sqr();
            let p_d = a_d.norm_sqr();
            assert!((p_u - (phi / 2.0).cos().powi(2)).abs() < EXACT_TOL, "phi = {phi}");
            assert!((p_u + p_d - 1.0).abs() < 1e-15, "unitarity at phi = {phi}");
        }
        let l = build_mach_zehnder(0.0);
        let a_u = l.path_amplitude("upper", "U").unwrap() + l.path_amplitude("lower", "U").unwrap();
        assert_amp(a_u, 0.0, 1.0); // constructive: all probability at U
    }

    #[test]
    fn beamsplitter_matrix_is_unitary() {
        let t = Amplitude::new(FRAC_1_SQRT_2, 0.0);
        let r = Amplitude::new(0.0, FRAC_1_SQRT_2);
        // U†U for [[t, r], [r, t]].
        let m00 = t.conj() * t + r.conj() * r;
        let m01 = t.conj() * r + r.conj() * t;
        let m10 = r.conj() * t + t.conj() * r;
        let m11 = r.conj() * r + t.conj() * t;
        assert!(distance(m00, Amplitude::ONE) < 1e-15);
        assert!(distance(m01, Amplitude::ZERO) < 1e-15);
        assert!(distance(m10, Amplitude::ZERO) < 1e-15);
        assert!(distance(m11, Amplitude::ONE) < 1e-15);
    }

    #[test]
    fn factor_order_does_not_matter() {
        // Complex multiplication commutes, so a path amplitude is invariant
        // under reordering of its scalar factors.
        let l = build_rarity_tapster(1.1, 0.2);
        let path = l.path("a").unwrap();
        let mut factors = l.factor_sequence(path);
        factors.push(Amplitude::new(0.0, FRAC_1_SQRT_2)); // exit reflect
        let forward = chain_route(&factors).unwrap();
        factors.reverse();
        let backward = chain_route(&factors).unwrap();
        assert!(distance(forward, backward) < 1e-15);
        assert!(distance(forward, l.path_amplitude("a", "u").unwrap()) < 1e-15);
    }

    #[test]
    fn validation_rejects_shared_wing_elements() {
        let mut elements = Vec::new();
        let mut add = |id: &str, kind: ElementKind| {
            elements.push(Element { id: id.to_string(), kind });
            elements.len() - 1
        };
        let src = add("src", ElementKind::Source);
        let shared = add("m", ElementKind::Mirror);
        let bs_l = add("bs_l", ElementKind::BeamSplitter);
        let bs_r = add("bs_r", ElementKind::BeamSplitter);
        let u = add("u", ElementKind::Detector);
        let d = add("d", ElementKind::Detector);
        let up = add("u'", ElementKind::Detector);
        let dp = add("d'", ElementKind::Detector);
        let mk = |label: &str, wing, bs, t_to, r_to| Path {
            label: label.to_string(),
            wing,
            traversals: vec![
                Traversal { element: src, role: TraversalRole::Emit },
                Traversal { element: shared, role: TraversalRole::Reflect },
            ],
            exit: ExitPorts { splitter: bs, transmit_to: t_to, reflect_to: r_to },
        };
        let paths = vec![
            mk("a", Wing::Left, bs_l, u, d),
            mk("a'", Wing::Right, bs_r, up, dp),
        ];
        let err = Layout::new("bad", elements, paths, vec![(0, 1)]).unwrap_err();
        assert!(matches!(err, LayoutError::Invalid(msg) if msg.contains("shared across wings")));
    }
}
