//! JSON report shared by all subcommands.
//!
//! Every command emits the same keys; inapplicable values are `null`.
//! Floats carry 17 significant digits so equal runs give equal bytes.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub input: InputInfo,
    pub params: Params,
    pub results: Results,
    /// Wall-clock milliseconds per phase; empty unless requested.
    pub timings: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct InputInfo {
    pub path: String,
    /// SHA-256 of the raw file bytes.
    pub sha256: String,
    pub name: Option<String>,
    pub kind: String,
    /// Nonzero coefficient range of the series actually used.
    pub n_lo: Option<i64>,
    pub n_hi: Option<i64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Params {
    pub order: Option<usize>,
    pub grid: Option<usize>,
    pub tol: f64,
    pub seed: u64,
    pub tail_tol: f64,
    pub primal_coeffs: Option<usize>,
    pub iters: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Results {
    pub d: Option<f64>,
    pub sigma2_estimate: Option<f64>,
    pub sigma_2n: Option<f64>,
    pub drift: Option<f64>,
    pub flatness_dev: Option<f64>,
    pub h2_leakage: Option<f64>,
    pub achieved_sup: Option<f64>,
    pub dual_pairing_re: Option<f64>,
    pub dual_pairing_im: Option<f64>,
    pub x_opt_l1: Option<f64>,
    pub h1_0_leakage: Option<f64>,
    pub modulus_agreement: Option<f64>,
    pub excluded_points: Option<usize>,
    pub f_opt_terms: Option<usize>,
    pub primal_value: Option<f64>,
    pub gap: Option<f64>,
    pub eps_grid: Option<f64>,
    pub iterations: Option<usize>,
    pub tail_bound: Option<f64>,
    pub product_residual: Option<f64>,
    pub norm_residual: Option<f64>,
    pub disk_zeros: Option<usize>,
    pub flags: Flags,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Flags {
    pub non_simple_sigma: bool,
    pub rank_zero: bool,
    pub non_flat: bool,
    pub not_converged: bool,
    pub drifting: bool,
}

/// Format with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Pretty JSON whose floats use [`fmt_f64`].
struct SigFigs<'a>(PrettyFormatter<'a>);

impl Formatter for SigFigs<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(fmt_f64(v).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(v))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut buf = Vec::new();
        let mut ser =
            serde_json::Serializer::with_formatter(&mut buf, SigFigs(PrettyFormatter::new()));
        self.serialize(&mut ser).expect("report serializes");
        buf.push(b'\n');
        String::from_utf8(buf).expect("JSON is UTF-8")
    }
}
