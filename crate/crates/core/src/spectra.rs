//! Spectral data: sampled curves, resampling onto a common grid, and the
//! linear image-formation integrals that turn spectra into sensor RGB.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::scalar::Scalar;

/// Reflectance values may slightly exceed 1 for fluorescent samples; anything
/// above this bound is rejected as data corruption.
pub const MAX_REFLECTANCE: f64 = 1.5;

/// Uniform wavelength grid the integrals are evaluated on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralGrid {
    start_nm: f64,
    end_nm: f64,
    step_nm: f64,
    count: usize,
}

impl SpectralGrid {
    pub fn new(start_nm: f64, end_nm: f64, step_nm: f64) -> Result<Self> {
        if !(start_nm.is_finite() && end_nm.is_finite() && step_nm.is_finite()) {
            return Err(Error::Validation("grid bounds must be finite".into()));
        }
        if start_nm >= end_nm {
            return Err(Error::Validation(format!(
                "grid start {start_nm} must be below end {end_nm}"
            )));
        }
        if step_nm <= 0.0 {
            return Err(Error::Validation(format!("grid step {step_nm} must be positive")));
        }
        let steps = (end_nm - start_nm) / step_nm;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(Error::Validation(format!(
                "grid span {start_nm}..{end_nm} is not an integer number of {step_nm} steps"
            )));
        }
        Ok(SpectralGrid {
            start_nm,
            end_nm,
            step_nm,
            count: steps.round() as usize + 1,
        })
    }

    /// 400-700 nm at 10 nm: 31 samples covering the visible range used by
    /// public sensitivity databases.
    pub fn visible_10nm() -> Self {
        SpectralGrid::new(400.0, 700.0, 10.0).unwrap()
    }

    pub fn start_nm(&self) -> f64 {
        self.start_nm
    }

    pub fn end_nm(&self) -> f64 {
        self.end_nm
    }

    pub fn step_nm(&self) -> f64 {
        self.step_nm
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn wavelengths(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.start_nm + self.step_nm * i as f64)
    }
}

impl Default for SpectralGrid {
    fn default() -> Self {
        SpectralGrid::visible_10nm()
    }
}

/// A sampled spectral curve: relative power for illuminants, reflectance for
/// surfaces. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    id: String,
    wavelengths_nm: Vec<f64>,
    values: Vec<T>,
}

impl<T: Scalar> Spectrum<T> {
    pub fn new(id: impl Into<String>, wavelengths_nm: Vec<f64>, values: Vec<T>) -> Result<Self> {
        validate_curve(&wavelengths_nm, &values)?;
        Ok(Spectrum {
            id: id.into(),
            wavelengths_nm,
            values,
        })
    }

    /// Constant curve over the grid range (e.g. the equal-energy illuminant).
    pub fn constant(id: impl Into<String>, grid: &SpectralGrid, value: T) -> Self {
        Spectrum {
            id: id.into(),
            wavelengths_nm: grid.wavelengths().collect(),
            values: vec![value; grid.count()],
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn wavelengths_nm(&self) -> &[f64] {
        &self.wavelengths_nm
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Value at an arbitrary wavelength: linear interpolation inside the
    /// sampled range, zero outside it.
    pub fn value_at(&self, wavelength_nm: f64) -> T {
        interpolate(&self.wavelengths_nm, &self.values, wavelength_nm)
    }

    /// Resample onto a uniform grid. Total on valid inputs.
    pub fn resample(&self, grid: &SpectralGrid) -> Spectrum<T> {
        Spectrum {
            id: self.id.clone(),
            wavelengths_nm: grid.wavelengths().collect(),
            values: grid.wavelengths().map(|w| self.value_at(w)).collect(),
        }
    }

    /// Enforce the reflectance bound (values in [0, MAX_REFLECTANCE]).
    pub fn validate_reflectance(&self) -> Result<()> {
        let max = T::cast(MAX_REFLECTANCE);
        for (i, &v) in self.values.iter().enumerate() {
            if v > max {
                return Err(Error::Validation(format!(
                    "reflectance '{}' exceeds {MAX_REFLECTANCE} at sample {i} ({v})",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

/// The three spectral sensitivity curves of one camera, on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CssFunction<T> {
    camera_id: String,
    wavelengths_nm: Vec<f64>,
    r: Vec<T>,
    g: Vec<T>,
    b: Vec<T>,
}

impl<T: Scalar> CssFunction<T> {
    pub fn new(
        camera_id: impl Into<String>,
        wavelengths_nm: Vec<f64>,
        r: Vec<T>,
        g: Vec<T>,
        b: Vec<T>,
    ) -> Result<Self> {
        validate_curve(&wavelengths_nm, &r)?;
        validate_curve(&wavelengths_nm, &g)?;
        validate_curve(&wavelengths_nm, &b)?;
        for (name, chan) in [("R", &r), ("G", &g), ("B", &b)] {
            if !chan.iter().any(|&v| v > T::zero()) {
                return Err(Error::Validation(format!(
                    "sensitivity channel {name} has no positive sample"
                )));
            }
        }
        Ok(CssFunction {
            camera_id: camera_id.into(),
            wavelengths_nm,
            r,
            g,
            b,
        })
    }

    pub fn camera_id(&self) -> &str {
        &self.camera_id
    }

    pub fn wavelengths_nm(&self) -> &[f64] {
        &self.wavelengths_nm
    }

    pub fn channel(&self, c: usize) -> &[T] {
        match c {
            0 => &self.r,
            1 => &self.g,
            _ => &self.b,
        }
    }

    pub fn resample(&self, grid: &SpectralGrid) -> CssFunction<T> {
        let sample = |vals: &[T]| -> Vec<T> {
            grid.wavelengths()
                .map(|w| interpolate(&self.wavelengths_nm, vals, w))
                .collect()
        };
        CssFunction {
            camera_id: self.camera_id.clone(),
            wavelengths_nm: grid.wavelengths().collect(),
            r: sample(&self.r),
            g: sample(&self.g),
            b: sample(&self.b),
        }
    }

    /// Rename the camera (used by sharpened/derived sensor sets).
    pub fn with_camera_id(mut self, camera_id: impl Into<String>) -> Self {
        self.camera_id = camera_id.into();
        self
    }
}

fn validate_curve<T: Scalar>(wavelengths_nm: &[f64], values: &[T]) -> Result<()> {
    if wavelengths_nm.is_empty() {
        return Err(Error::Validation("empty spectral curve".into()));
    }
    if wavelengths_nm.len() != values.len() {
        return Err(Error::Validation(format!(
            "wavelengths ({}) and values ({}) differ in length",
            wavelengths_nm.len(),
            values.len()
        )));
    }
    for w in wavelengths_nm.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Validation(format!(
                "non-increasing grid: {} after {}",
                w[1], w[0]
            )));
        }
    }
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::Validation(format!("non-finite value at sample {i}")));
        }
        if v < T::zero() {
            return Err(Error::Validation(format!(
                "negative spectral value {v} at sample {i}"
            )));
        }
    }
    Ok(())
}

fn interpolate<T: Scalar>(wavelengths: &[f64], values: &[T], at: f64) -> T {
    let first = wavelengths[0];
    let last = wavelengths[wavelengths.len() - 1];
    if at < first || at > last {
        return T::zero();
    }
    let hi = wavelengths.partition_point(|&w| w < at);
    if hi == 0 {
        return values[0];
    }
    if (wavelengths[hi] - at).abs() == 0.0 {
        return values[hi];
    }
    let lo = hi - 1;
    let t = (at - wavelengths[lo]) / (wavelengths[hi] - wavelengths[lo]);
    values[lo] + (values[hi] - values[lo]) * T::cast(t)
}

// ---------------------------------------------------------------------------
// Image formation
// ---------------------------------------------------------------------------

/// Sensor response to a spectral power distribution: per channel the Riemann
/// sum of sensitivity times power over the grid. An all-zero result is legal
/// (the caller may flag it); it is not an error.
pub fn sensor_response<T: Scalar>(
    css: &CssFunction<T>,
    spd: &Spectrum<T>,
    grid: &SpectralGrid,
) -> Vec3<T> {
    let css = css.resample(grid);
    let spd = spd.resample(grid);
    let step = T::cast(grid.step_nm());
    let mut out = [T::zero(); 3];
    for c in 0..3 {
        let chan = css.channel(c);
        let mut acc = T::zero();
        for (s, p) in chan.iter().zip(spd.values()) {
            acc += *s * *p;
        }
        out[c] = acc * step;
    }
    out
}

/// RGB of a surface with the given reflectance under the given illuminant:
/// per channel the Riemann sum of sensitivity x illuminant x reflectance.
pub fn render_reflectance<T: Scalar>(
    css: &CssFunction<T>,
    illum: &Spectrum<T>,
    refl: &Spectrum<T>,
    grid: &SpectralGrid,
) -> Vec3<T> {
    let css = css.resample(grid);
    let illum = illum.resample(grid);
    let refl = refl.resample(grid);
    let step = T::cast(grid.step_nm());
    let mut out = [T::zero(); 3];
    for c in 0..3 {
        let chan = css.channel(c);
        let mut acc = T::zero();
        for ((s, i), r) in chan.iter().zip(illum.values()).zip(refl.values()) {
            acc += *s * *i * *r;
        }
        out[c] = acc * step;
    }
    out
}

// ---------------------------------------------------------------------------
// CSV ingest
// ---------------------------------------------------------------------------

/// What a multi-column spectra file contains; selects validation rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectraKind {
    Reflectance,
    Illuminant,
}

/// Load a spectra CSV: header row, wavelength in column 1, one spectrum per
/// remaining column. Column names become spectrum ids.
pub fn load_spectra_csv<T: Scalar>(
    path: impl AsRef<Path>,
    kind: SpectraKind,
) -> Result<Vec<Spectrum<T>>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let table = parse_table::<T>(path, &text)?;
    let mut out = Vec::with_capacity(table.columns.len());
    for (name, values) in table.names.into_iter().zip(table.columns) {
        let s = Spectrum::new(name, table.wavelengths.clone(), values)?;
        if kind == SpectraKind::Reflectance {
            s.validate_reflectance()?;
        }
        out.push(s);
    }
    Ok(out)
}

/// Load one camera's sensitivity file: columns wavelength,R,G,B. The camera
/// id is the file stem.
pub fn load_css_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<CssFunction<T>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let table = parse_table::<T>(path, &text)?;
    if table.columns.len() != 3 {
        return Err(Error::Validation(format!(
            "{}: sensitivity file must have exactly 3 value columns (R,G,B), found {}",
            path.display(),
            table.columns.len()
        )));
    }
    let camera_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "camera".into());
    let mut cols = table.columns.into_iter();
    CssFunction::new(
        camera_id,
        table.wavelengths,
        cols.next().unwrap(),
        cols.next().unwrap(),
        cols.next().unwrap(),
    )
}

struct SpectraTable<T> {
    names: Vec<String>,
    wavelengths: Vec<f64>,
    columns: Vec<Vec<T>>,
}

fn parse_table<T: Scalar>(path: &Path, text: &str) -> Result<SpectraTable<T>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Validation(format!("{}: empty file", path.display())))?;
    let names: Vec<String> = header.split(',').skip(1).map(|s| s.trim().to_string()).collect();
    if names.is_empty() {
        return Err(Error::Validation(format!(
            "{}: header has no value columns",
            path.display()
        )));
    }
    let mut wavelengths = Vec::new();
    let mut columns: Vec<Vec<T>> = vec![Vec::new(); names.len()];
    for (line_idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row = line_idx + 1; // 1-based
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() + 1 {
            return Err(Error::Parse {
                path: path.into(),
                row,
                col: fields.len(),
                msg: format!("expected {} fields, found {}", names.len() + 1, fields.len()),
            });
        }
        let w: f64 = fields[0].trim().parse().map_err(|_| Error::Parse {
            path: path.into(),
            row,
            col: 1,
            msg: format!("malformed wavelength '{}'", fields[0].trim()),
        })?;
        wavelengths.push(w);
        for (c, field) in fields[1..].iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                path: path.into(),
                row,
                col: c + 2,
                msg: format!("malformed number '{}'", field.trim()),
            })?;
            columns[c].push(T::cast(v));
        }
    }
    if wavelengths.is_empty() {
        return Err(Error::Validation(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    Ok(SpectraTable {
        names,
        wavelengths,
        columns,
    })
}
