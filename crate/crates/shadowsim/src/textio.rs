//! Canonical text output formats.
//!
//! Every table the simulator emits is defined here so that identical runs
//! produce byte-identical files. Probabilities and amplitudes are printed
//! with 17 significant digits (full `f64` round-trip precision).

use crate::experiment::{CoincidenceRecord, JointDistribution};
use crate::layout::Layout;

/// 17-significant-digit scientific notation, the file format for floats.
pub fn format_f17(x: f64) -> String {
    format!("{x:.16e}")
}

pub const SCAN_HEADER: &str = "alpha,beta,p_uu,p_ud,p_du,p_dd,E";

pub fn scan_row(d: &JointDistribution) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        format_f17(d.alpha),
        format_f17(d.beta),
        format_f17(d.p_uu),
        format_f17(d.p_ud),
        format_f17(d.p_du),
        format_f17(d.p_dd),
        format_f17(d.correlation()),
    )
}

pub const EVENT_HEADER: &str = "trial,left,right,left_tangible,right_tangible";

pub fn event_row(r: &CoincidenceRecord, layout: &Layout) -> String {
    format!(
        "{},{},{},{},{}",
        r.trial,
        r.left.as_str(),
        r.right.as_str(),
        layout.paths()[r.assignment.left_tangible].label,
        layout.paths()[r.assignment.right_tangible].label,
    )
}

pub const TRACE_HEADER: &str = "trial,left_tangible,right_tangible,shadow_paths";

/// Assignment trace row; the shadow paths are `;`-joined.
pub fn trace_row(r: &CoincidenceRecord, layout: &Layout) -> String {
    format!(
        "{},{},{},{};{}",
        r.trial,
        layout.paths()[r.assignment.left_tangible].label,
        layout.paths()[r.assignment.right_tangible].label,
        layout.paths()[r.assignment.left_shadow].label,
        layout.paths()[r.assignment.right_shadow].label,
    )
}

pub const MZ_HEADER: &str = "phi,p_u,p_d";

pub fn mz_row(phi: f64, p_u: f64, p_d: f64) -> String {
    format!("{},{},{}", format_f17(phi), format_f17(p_u), format_f17(p_d))
}

pub const EVOLUTION_HEADER: &str = "t,x,re_psi,im_psi";

pub fn evolution_row(t: f64, x: f64, re: f64, im: f64) -> String {
    format!("{},{},{},{}", format_f17(t), format_f17(x), format_f17(re), format_f17(im))
}

pub const KERNEL_STUDY_HEADER: &str = "slices,rel_error_modulus,phase_error";

pub fn kernel_study_row(slices: usize, rel_error_modulus: f64, phase_error: f64) -> String {
    format!("{},{},{}", slices, format_f17(rel_error_modulus), format_f17(phase_error))
}
