//! Parameter files and tabular data formats.
//!
//! Parameter files are JSON objects keyed by circuit symbol (`L_ab`, `C_a`,
//! `L_sh`, ...). Values are strings with a unit suffix such as `"2.023 nH"`
//! or bare SI numbers. CSV files carry a header row; every CSV written here
//! has a JSON sidecar describing its columns. Bias columns are in turns
//! (`phi_ex / 2 pi`).

use std::collections::BTreeMap;
use std::io::{Read, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::circuit::{eigenmodes, rwa_modes, CircuitParams, NetworkRecord, NormalModes, ThreeJunctionParams};
use crate::error::{Error, Result};
use crate::fit::{FitConfig, FitParam, ParamBounds, Peak, PeakSet};
use crate::units::{ghz, rad_to_turns, turns_to_rad};

/// Physical dimension of a parameter-file value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Inductance,
    Capacitance,
    Frequency,
    Angle,
    Dimensionless,
}

impl Dimension {
    fn base_unit(self) -> &'static str {
        match self {
            Dimension::Inductance => "H",
            Dimension::Capacitance => "F",
            Dimension::Frequency => "Hz",
            Dimension::Angle => "rad",
            Dimension::Dimensionless => "",
        }
    }
}

/// Decimal exponent of an SI prefix.
fn prefix(p: &str) -> Option<i32> {
    Some(match p {
        "" => 0,
        "a" => -18,
        "f" => -15,
        "p" => -12,
        "n" => -9,
        "u" | "µ" | "μ" => -6,
        "m" => -3,
        "k" => 3,
        "M" => 6,
        "G" => 9,
        _ => return None,
    })
}

/// Parses `num * 10^shift` with a single rounding.
fn parse_scaled(num: &str, shift: i32) -> Option<f64> {
    let (mantissa, exp) = match num.find(['e', 'E']) {
        Some(i) => (&num[..i], num[i + 1..].parse::<i32>().ok()?),
        None => (num, 0),
    };
    mantissa.parse::<f64>().ok()?;
    format!("{mantissa}e{}", exp + shift).parse().ok()
}

/// Parses `"<number> <unit>"` into SI units; angles accept `rad` and `turn`.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64> {
    let t = text.trim();
    let split = t
        .char_indices()
        .find(|&(i, c)| {
            c.is_alphabetic() && !((c == 'e' || c == 'E') && t[i + 1..].starts_with(|d: char| d.is_ascii_digit() || d == '-' || d == '+'))
        })
        .map(|(i, _)| i)
        .unwrap_or(t.len());
    let (num, unit) = (t[..split].trim(), t[split..].trim());
    let bad_unit = || Error::Format(format!("`{text}`: unit `{unit}` is not a {dim:?} unit"));
    let (shift, factor) = match dim {
        Dimension::Dimensionless if unit.is_empty() => (0, 1.0),
        Dimension::Angle if unit == "turn" || unit == "turns" => (0, std::f64::consts::TAU),
        Dimension::Angle if unit.is_empty() => return Err(bad_unit()),
        _ if unit.is_empty() => (0, 1.0),
        _ => (
            unit.strip_suffix(dim.base_unit())
                .and_then(prefix)
                .ok_or_else(bad_unit)?,
            1.0,
        ),
    };
    let value = parse_scaled(num, shift)
        .ok_or_else(|| Error::Format(format!("`{text}`: `{num}` is not a number")))?;
    if !value.is_finite() {
        return Err(Error::Format(format!("`{text}` is not finite")));
    }
    Ok(value * factor)
}

/// Formats `value` (SI) in the given unit, losslessly.
pub fn format_quantity(value: f64, unit: &str, scale: f64) -> String {
    format!("{} {unit}", value / scale)
}

fn quantity(v: &Value, key: &str, dim: Dimension) -> Result<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::Format(format!("`{key}` is not a finite number"))),
        Value::String(s) => parse_quantity(s, dim),
        _ => Err(Error::Format(format!("`{key}` must be a number or a string with unit"))),
    }
}

struct Fields {
    map: Map<String, Value>,
}

impl Fields {
    fn take(&mut self, key: &str, dim: Dimension) -> Result<f64> {
        let v = self
            .map
            .remove(key)
            .ok_or_else(|| Error::Format(format!("missing parameter `{key}`")))?;
        quantity(&v, key, dim)
    }

    fn take_opt(&mut self, key: &str, dim: Dimension) -> Result<Option<f64>> {
        match self.map.remove(key) {
            Some(v) => quantity(&v, key, dim).map(Some),
            None => Ok(None),
        }
    }

    /// `L_ab` for both resonators, or separate `L_a` and `L_b`.
    fn resonator_inductances(&mut self) -> Result<(f64, f64)> {
        match self.take_opt("L_ab", Dimension::Inductance)? {
            Some(l) => {
                if self.map.contains_key("L_a") || self.map.contains_key("L_b") {
                    return Err(Error::Format("give either `L_ab` or `L_a` and `L_b`".into()));
                }
                Ok((l, l))
            }
            None => Ok((
                self.take("L_a", Dimension::Inductance)?,
                self.take("L_b", Dimension::Inductance)?,
            )),
        }
    }

    fn finish(self) -> Result<()> {
        match self.map.keys().next() {
            Some(k) => Err(Error::Format(format!("unknown parameter `{k}`"))),
            None => Ok(()),
        }
    }
}

fn object(v: Value) -> Result<Fields> {
    match v {
        Value::Object(mut map) => {
            map.remove("comment");
            Ok(Fields { map })
        }
        _ => Err(Error::Format("parameter file must hold a JSON object".into())),
    }
}

/// Reads single-junction coupler parameters and validates them.
pub fn params_from_json(v: Value) -> Result<CircuitParams> {
    let mut f = object(v)?;
    let (l_a, l_b) = f.resonator_inductances()?;
    let p = CircuitParams {
        l_a,
        l_b,
        c_a: f.take("C_a", Dimension::Capacitance)?,
        c_b: f.take("C_b", Dimension::Capacitance)?,
        l_sh: f.take("L_sh", Dimension::Inductance)?,
        l_j0: f.take("L_J0", Dimension::Inductance)?,
        m_0: f.take("M_0", Dimension::Inductance)?,
        l_0: f.take("L_0", Dimension::Inductance)?,
        gamma: f.take("gamma", Dimension::Dimensionless)?,
    };
    f.finish()?;
    p.validate()?;
    Ok(p)
}

pub fn params_to_json(p: &CircuitParams) -> Value {
    let mut m = Map::new();
    if p.l_a == p.l_b {
        m.insert("L_ab".into(), format_quantity(p.l_a, "nH", 1e-9).into());
    } else {
        m.insert("L_a".into(), format_quantity(p.l_a, "nH", 1e-9).into());
        m.insert("L_b".into(), format_quantity(p.l_b, "nH", 1e-9).into());
    }
    m.insert("C_a".into(), format_quantity(p.c_a, "fF", 1e-15).into());
    m.insert("C_b".into(), format_quantity(p.c_b, "fF", 1e-15).into());
    m.insert("L_sh".into(), format_quantity(p.l_sh, "nH", 1e-9).into());
    m.insert("L_J0".into(), format_quantity(p.l_j0, "nH", 1e-9).into());
    m.insert("M_0".into(), format_quantity(p.m_0, "nH", 1e-9).into());
    m.insert("L_0".into(), format_quantity(p.l_0, "nH", 1e-9).into());
    m.insert("gamma".into(), p.gamma.into());
    Value::Object(m)
}

/// Reads three-junction coupler parameters and validates them.
pub fn three_junction_from_json(v: Value) -> Result<ThreeJunctionParams> {
    let mut f = object(v)?;
    let (l_a, l_b) = f.resonator_inductances()?;
    let p = ThreeJunctionParams {
        l_a,
        l_b,
        c_a: f.take("C_a", Dimension::Capacitance)?,
        c_b: f.take("C_b", Dimension::Capacitance)?,
        m_0: f.take("M_0", Dimension::Inductance)?,
        l_0: f.take("L_0", Dimension::Inductance)?,
        l_0l: f.take("L_0L", Dimension::Inductance)?,
        l_0r: f.take("L_0R", Dimension::Inductance)?,
        l_js_l: f.take("L_JsL", Dimension::Inductance)?,
        l_js_r: f.take("L_JsR", Dimension::Inductance)?,
        l_j_alpha: f.take("L_Jalpha", Dimension::Inductance)?,
    };
    f.finish()?;
    p.validate()?;
    Ok(p)
}

pub fn three_junction_to_json(p: &ThreeJunctionParams) -> Value {
    let nh = |v: f64| Value::from(format_quantity(v, "nH", 1e-9));
    let mut m = Map::new();
    if p.l_a == p.l_b {
        m.insert("L_ab".into(), nh(p.l_a));
    } else {
        m.insert("L_a".into(), nh(p.l_a));
        m.insert("L_b".into(), nh(p.l_b));
    }
    m.insert("C_a".into(), format_quantity(p.c_a, "fF", 1e-15).into());
    m.insert("C_b".into(), format_quantity(p.c_b, "fF", 1e-15).into());
    for (k, v) in [
        ("M_0", p.m_0),
        ("L_0", p.l_0),
        ("L_0L", p.l_0l),
        ("L_0R", p.l_0r),
        ("L_JsL", p.l_js_l),
        ("L_JsR", p.l_js_r),
        ("L_Jalpha", p.l_j_alpha),
    ] {
        m.insert(k.into(), nh(v));
    }
    Value::Object(m)
}

/// Either coupler variant, told apart by the keys present.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeviceParams {
    SingleJunction(CircuitParams),
    ThreeJunction(ThreeJunctionParams),
}

pub fn device_from_json(v: Value) -> Result<DeviceParams> {
    let three = v.as_object().is_some_and(|m| m.contains_key("L_Jalpha"));
    if three {
        three_junction_from_json(v).map(DeviceParams::ThreeJunction)
    } else {
        params_from_json(v).map(DeviceParams::SingleJunction)
    }
}

/// One column of a CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub name: String,
    pub unit: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
}

impl ColumnMeta {
    pub fn new(name: &str, unit: &str, description: &str) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
            description: description.into(),
        }
    }
}

/// JSON sidecar of a CSV artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMeta {
    /// Format identifier, e.g. `spectrum/1`.
    pub schema: String,
    pub columns: Vec<ColumnMeta>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attributes: BTreeMap<String, Value>,
}

impl TableMeta {
    pub fn new(schema: &str, columns: Vec<ColumnMeta>) -> Self {
        Self {
            schema: schema.into(),
            columns,
            attributes: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.attributes.insert(key.into(), value.into());
        self
    }

    pub fn header(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }
}

/// Shortest round-trip text, in exponent form for very small or large magnitudes.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e16).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

/// Writes a numeric table. Numbers use the shortest representation that
/// parses back to the same `f64`.
pub fn write_table<W: Write>(w: W, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::Format(format!("row has {} fields, header {}", row.len(), header.len())));
        }
        out.write_record(row.iter().map(|&v| format_number(v)))?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a numeric table, checking the header names.
pub fn read_table<R: Read>(r: R, expected: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != expected {
        return Err(Error::Format(format!("expected columns {expected:?}, found {header:?}")));
    }
    let mut rows = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::Format(format!("row {}: `{f}` is not a number", line + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub const SPECTRUM_COLUMNS: [&str; 3] = ["bias", "frequency_Hz", "amplitude"];
pub const PEAK_COLUMNS: [&str; 3] = ["bias", "frequency_Hz", "weight"];

pub fn spectrum_meta() -> TableMeta {
    TableMeta::new(
        "spectrum/1",
        vec![
            ColumnMeta::new("bias", "turn", "phi_ex / 2 pi"),
            ColumnMeta::new("frequency_Hz", "Hz", "probe frequency"),
            ColumnMeta::new("amplitude", "arb", "signal magnitude"),
        ],
    )
}

pub fn peaks_meta() -> TableMeta {
    TableMeta::new(
        "peaks/1",
        vec![
            ColumnMeta::new("bias", "turn", "bias coordinate / 2 pi"),
            ColumnMeta::new("frequency_Hz", "Hz", "peak frequency"),
            ColumnMeta::new("weight", "1", "least-squares weight"),
        ],
    )
}

/// Dense spectrum over a rectangular (bias, probe) grid. Bias in rad.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTable {
    pub bias: Vec<f64>,
    pub probe_hz: Vec<f64>,
    pub amplitude: DMatrix<f64>,
}

/// Long-format rows, bias-major.
pub fn write_spectrum_csv<W: Write>(w: W, bias: &[f64], probe_hz: &[f64], amplitude: &DMatrix<f64>) -> Result<()> {
    let rows = (0..bias.len()).flat_map(|i| {
        (0..probe_hz.len()).map(move |j| vec![rad_to_turns(bias[i]), probe_hz[j], amplitude[(i, j)]])
    });
    write_table(w, &SPECTRUM_COLUMNS, rows)
}

/// Reads a long-format spectrum; every (bias, frequency) pair must appear once.
pub fn read_spectrum_csv<R: Read>(r: R) -> Result<SpectrumTable> {
    let rows = read_table(r, &SPECTRUM_COLUMNS)?;
    let axis = |k: usize| {
        let mut v: Vec<f64> = rows.iter().map(|r| r[k]).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let bias_t = axis(0);
    let probe = axis(1);
    if bias_t.len() * probe.len() != rows.len() {
        return Err(Error::Format(format!(
            "{} rows do not form a {}x{} grid",
            rows.len(),
            bias_t.len(),
            probe.len()
        )));
    }
    let mut amplitude = DMatrix::from_element(bias_t.len(), probe.len(), f64::NAN);
    for row in &rows {
        let i = bias_t.binary_search_by(|x| x.total_cmp(&row[0])).unwrap();
        let j = probe.binary_search_by(|x| x.total_cmp(&row[1])).unwrap();
        amplitude[(i, j)] = row[2];
    }
    if amplitude.iter().any(|a| a.is_nan()) {
        return Err(Error::Format("spectrum grid has duplicate or missing cells".into()));
    }
    Ok(SpectrumTable {
        bias: bias_t.into_iter().map(turns_to_rad).collect(),
        probe_hz: probe,
        amplitude,
    })
}

pub fn write_peaks_csv<W: Write>(w: W, peaks: &PeakSet) -> Result<()> {
    write_table(
        w,
        &PEAK_COLUMNS,
        peaks
            .peaks
            .iter()
            .map(|p| vec![rad_to_turns(p.bias), p.frequency_hz, p.weight]),
    )
}

pub fn read_peaks_csv<R: Read>(r: R) -> Result<PeakSet> {
    Ok(PeakSet::new(
        read_table(r, &PEAK_COLUMNS)?
            .into_iter()
            .map(|row| Peak {
                bias: turns_to_rad(row[0]),
                frequency_hz: row[1],
                weight: row[2],
            })
            .collect(),
    ))
}

pub const RECORD_COLUMNS: [&str; 11] = [
    "phi_ex",
    "phi_star",
    "M_star",
    "L_star",
    "omega_a",
    "omega_b",
    "g_r",
    "omega_plus",
    "omega_minus",
    "omega_plus_rwa",
    "omega_minus_rwa",
];

pub fn records_meta() -> TableMeta {
    let f = |name: &str, what: &str| ColumnMeta::new(name, "GHz", &format!("{what}, f = omega / 2 pi"));
    TableMeta::new(
        "coefficients/1",
        vec![
            ColumnMeta::new("phi_ex", "turn", "external flux phase / 2 pi"),
            ColumnMeta::new("phi_star", "rad", "coupler junction phase at the potential minimum"),
            ColumnMeta::new("M_star", "H", "effective mutual inductance"),
            ColumnMeta::new("L_star", "H", "series inductance added to each resonator"),
            f("omega_a", "dressed resonator a"),
            f("omega_b", "dressed resonator b"),
            f("g_r", "coupling"),
            f("omega_plus", "upper normal mode"),
            f("omega_minus", "lower normal mode"),
            f("omega_plus_rwa", "upper mode without counter-rotating terms"),
            f("omega_minus_rwa", "lower mode without counter-rotating terms"),
        ],
    )
}

/// One coefficient row. `phi_ex` in rad; the lower mode is NaN past the
/// stability limit.
pub fn record_row(phi_ex: f64, phi_star: f64, network: &NetworkRecord) -> Vec<f64> {
    let c = network.coefficients;
    let exact = eigenmodes(&c).unwrap_or(NormalModes {
        plus: f64::NAN,
        minus: f64::NAN,
    });
    let rwa = rwa_modes(&c);
    vec![
        rad_to_turns(phi_ex),
        phi_star,
        network.coupler.m_star,
        network.coupler.l_star(),
        ghz(c.omega_a),
        ghz(c.omega_b),
        ghz(c.g_r),
        ghz(exact.plus),
        ghz(exact.minus),
        ghz(rwa.plus),
        ghz(rwa.minus),
    ]
}

fn param_dimension(p: FitParam) -> Dimension {
    match p {
        FitParam::Ca | FitParam::Cb => Dimension::Capacitance,
        FitParam::Gamma | FitParam::FluxScale => Dimension::Dimensionless,
        FitParam::FluxOffset => Dimension::Angle,
        _ => Dimension::Inductance,
    }
}

fn param_list(v: &Value, key: &str) -> Result<Vec<FitParam>> {
    v.as_array()
        .ok_or_else(|| Error::Format(format!("`{key}` must be a list of parameter names")))?
        .iter()
        .map(|s| {
            s.as_str()
                .ok_or_else(|| Error::Format(format!("`{key}` entries must be strings")))
                .and_then(FitParam::parse)
        })
        .collect()
}

/// Reads fit settings on top of a starting point.
///
/// Recognized keys: `free` (only these move), `freeze`, `bounds`
/// (`{"L_sh": ["0.1 nH", "1 nH"]}`), `tie_resonators`, `local_leak`,
/// `max_iterations`, `loss_tolerance`, `holdout_stride` (`null` disables),
/// `band` (two frequencies), `flux_scale`, `flux_offset`.
pub fn fit_config_from_json(initial: CircuitParams, v: Value) -> Result<FitConfig> {
    let mut f = object(v)?;
    let mut cfg = FitConfig::new(initial);
    if let Some(s) = f.take_opt("flux_scale", Dimension::Dimensionless)? {
        cfg.calibration.scale = s;
    }
    if let Some(o) = f.take_opt("flux_offset", Dimension::Angle)? {
        cfg.calibration.offset = o;
    }
    let flag = |f: &mut Fields, key: &str| -> Result<Option<bool>> {
        f.map
            .remove(key)
            .map(|v| v.as_bool().ok_or_else(|| Error::Format(format!("`{key}` must be true or false"))))
            .transpose()
    };
    if let Some(b) = flag(&mut f, "tie_resonators")? {
        cfg.tie_resonators = b;
    }
    if let Some(b) = flag(&mut f, "local_leak")? {
        cfg.local_leak = b;
    }
    if let Some(v) = f.map.remove("max_iterations") {
        cfg.max_iterations = v
            .as_u64()
            .ok_or_else(|| Error::Format("`max_iterations` must be a non-negative integer".into()))?
            as usize;
    }
    if let Some(t) = f.take_opt("loss_tolerance", Dimension::Dimensionless)? {
        cfg.loss_tolerance = t;
    }
    if let Some(v) = f.map.remove("holdout_stride") {
        cfg.holdout_stride = match v {
            Value::Null => None,
            v => Some(
                v.as_u64()
                    .ok_or_else(|| Error::Format("`holdout_stride` must be an integer or null".into()))?
                    as usize,
            ),
        };
    }
    if let Some(v) = f.map.remove("band") {
        match v.as_array().map(Vec::as_slice) {
            Some([lo, hi]) => {
                cfg.band_hz = (quantity(lo, "band", Dimension::Frequency)?, quantity(hi, "band", Dimension::Frequency)?)
            }
            _ => return Err(Error::Format("`band` must be [low, high]".into())),
        }
    }
    if let Some(v) = f.map.remove("free") {
        let free = param_list(&v, "free")?;
        cfg = cfg.freeze_all();
        for p in free {
            cfg = cfg.free(p);
        }
    }
    if let Some(v) = f.map.remove("freeze") {
        for p in param_list(&v, "freeze")? {
            cfg = cfg.freeze(p);
        }
    }
    if let Some(v) = f.map.remove("bounds") {
        let map = v
            .as_object()
            .ok_or_else(|| Error::Format("`bounds` must map parameter names to [lower, upper]".into()))?;
        for (name, range) in map {
            let p = FitParam::parse(name)?;
            let dim = param_dimension(p);
            let b = cfg.bounds_of(p);
            match range.as_array().map(Vec::as_slice) {
                Some([lo, hi]) => {
                    cfg.bounds.insert(
                        p,
                        ParamBounds {
                            lower: quantity(lo, name, dim)?,
                            upper: quantity(hi, name, dim)?,
                            ..b
                        },
                    );
                }
                _ => return Err(Error::Format(format!("bounds of `{name}` must be [lower, upper]"))),
            }
        }
    }
    f.finish()?;
    cfg.validate()?;
    Ok(cfg)
}


#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn quantities_with_units() {
        assert_eq!(parse_quantity("2.023 nH", Dimension::Inductance).unwrap(), 2.023e-9);
        assert_eq!(parse_quantity("184.3fF", Dimension::Capacitance).unwrap(), 184.3e-15);
        assert_eq!(parse_quantity("1.5e-9", Dimension::Inductance).unwrap(), 1.5e-9);
        assert_eq!(parse_quantity("1.5e-9 H", Dimension::Inductance).unwrap(), 1.5e-9);
        assert_eq!(parse_quantity("5 GHz", Dimension::Frequency).unwrap(), 5e9);
        assert!((parse_quantity("0.5turn", Dimension::Angle).unwrap() - std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(parse_quantity("1 rad", Dimension::Angle).unwrap(), 1.0);
        assert!(parse_quantity("0.5", Dimension::Angle).is_err());
        assert!(parse_quantity("3 nF", Dimension::Inductance).is_err());
        assert!(parse_quantity("abc nH", Dimension::Inductance).is_err());
        assert!(parse_quantity("0.1 H", Dimension::Dimensionless).is_err());
    }

    #[test]
    fn table1_round_trips_exactly() {
        let p = CircuitParams::table1();
        let v = params_to_json(&p);
        assert_eq!(v["L_ab"], "2.023 nH");
        let back = params_from_json(v).unwrap();
        for (a, b) in [(p.l_a, back.l_a), (p.c_a, back.c_a), (p.l_sh, back.l_sh), (p.m_0, back.m_0)] {
            assert!((a - b).abs() <= 1e-15 * a.abs(), "{a} {b}");
        }
        assert_eq!(p.gamma, back.gamma);
    }

    #[test]
    fn three_junction_round_trips() {
        let p = ThreeJunctionParams::fig3();
        let back = three_junction_from_json(three_junction_to_json(&p)).unwrap();
        assert!((back.l_j_alpha - p.l_j_alpha).abs() < 1e-24);
        assert!(matches!(
            device_from_json(three_junction_to_json(&p)).unwrap(),
            DeviceParams::ThreeJunction(_)
        ));
    }

    #[test]
    fn rejects_bad_files() {
        let good = params_to_json(&CircuitParams::table1());
        let mut extra = good.clone();
        extra["L_x"] = json!("1 nH");
        assert!(params_from_json(extra).is_err());
        let mut missing = good.clone();
        missing.as_object_mut().unwrap().remove("C_a");
        assert!(params_from_json(missing).is_err());
        let mut negative = good.clone();
        negative["C_a"] = json!("-1 fF");
        assert!(params_from_json(negative).unwrap_err().is_input_error());
        let mut both = good;
        both["L_a"] = json!("2 nH");
        assert!(params_from_json(both).is_err());
        assert!(params_from_json(json!([1, 2])).is_err());
    }

    #[test]
    fn spectrum_csv_round_trip_is_lossless() {
        let bias = vec![0.1, 0.2 + 1e-13, 0.3];
        let probe = vec![4e9, 4.1e9];
        let amp = DMatrix::from_fn(3, 2, |i, j| (i as f64 + 1.0) / 3.0 + j as f64 * 1e-17);
        let mut buf = Vec::new();
        write_spectrum_csv(&mut buf, &bias, &probe, &amp).unwrap();
        let t = read_spectrum_csv(buf.as_slice()).unwrap();
        assert_eq!(t.amplitude, amp);
        assert_eq!(t.probe_hz, probe);
        for (a, b) in t.bias.iter().zip(&bias) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn spectrum_csv_requires_full_grid() {
        let text = "bias,frequency_Hz,amplitude\n0.1,4e9,1\n0.1,5e9,2\n0.2,4e9,3\n";
        assert!(read_spectrum_csv(text.as_bytes()).is_err());
        let text = "bias,freq,amplitude\n0.1,4e9,1\n";
        assert!(read_spectrum_csv(text.as_bytes()).is_err());
    }

    #[test]
    fn peaks_round_trip() {
        let peaks = PeakSet::new(vec![
            Peak { bias: 1.0, frequency_hz: 5.5e9, weight: 1.0 },
            Peak { bias: 2.0, frequency_hz: 6.25e9, weight: 0.5 },
        ]);
        let mut buf = Vec::new();
        write_peaks_csv(&mut buf, &peaks).unwrap();
        let back = read_peaks_csv(buf.as_slice()).unwrap();
        for (a, b) in back.peaks.iter().zip(&peaks.peaks) {
            assert!((a.bias - b.bias).abs() < 1e-15);
            assert_eq!(a.frequency_hz, b.frequency_hz);
            assert_eq!(a.weight, b.weight);
        }
    }

    #[test]
    fn meta_serializes_columns() {
        let m = spectrum_meta().with("signal", "t_BA");
        let v = serde_json::to_value(&m).unwrap();
        assert_eq!(v["schema"], "spectrum/1");
        assert_eq!(v["columns"][1]["unit"], "Hz");
        assert_eq!(m.header(), SPECTRUM_COLUMNS.to_vec());
    }
    #[test]
    fn fit_config_overrides() {
        let v = json!({
            "free": ["L_sh", "L_J0"],
            "bounds": {"L_sh": ["0.2 nH", "0.6 nH"]},
            "holdout_stride": null,
            "band": ["4.5 GHz", "7.5 GHz"],
            "max_iterations": 50
        });
        let cfg = fit_config_from_json(CircuitParams::table1(), v).unwrap();
        assert_eq!(cfg.free_parameters(), vec![FitParam::Lsh, FitParam::Lj0]);
        let b = cfg.bounds_of(FitParam::Lsh);
        assert!((b.lower - 0.2e-9).abs() < 1e-24 && (b.upper - 0.6e-9).abs() < 1e-24);
        assert_eq!(cfg.holdout_stride, None);
        assert_eq!(cfg.band_hz, (4.5e9, 7.5e9));
        assert_eq!(cfg.max_iterations, 50);
        assert!(fit_config_from_json(CircuitParams::table1(), json!({"frees": []})).is_err());
        assert!(fit_config_from_json(CircuitParams::table1(), json!({"free": ["L_x"]})).is_err());
    }

    #[test]
    fn number_format_round_trips() {
        for v in [0.0, -0.0, 1.0, 0.1, 2.023e-9, -1.0795e-79, 6.5e9, 1e16, 1e-4, f64::MIN_POSITIVE, f64::MAX, 1.0 / 3.0] {
            let s = format_number(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(format_number(2.023e-9), "2.023e-9");
        assert_eq!(format_number(f64::NAN), "NaN");
    }

    #[test]
    fn record_row_units() {
        let p = CircuitParams::table1();
        let r = crate::circuit::mode_coefficients(&p, crate::circuit::FluxBias::from_turns(0.5)).unwrap();
        let row = record_row(r.bias.phi_ex, r.phi_star, &r.network);
        assert_eq!(row.len(), RECORD_COLUMNS.len());
        assert!((row[0] - 0.5).abs() < 1e-15);
        assert!((row[6] - ghz(r.coefficients().g_r)).abs() < 1e-15);
        assert!(row[7] > row[8]);
    }
}
