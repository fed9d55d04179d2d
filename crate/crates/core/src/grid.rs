//! Grid types and the `TGRID v1` on-disk format.
//!
//! A grid file is one ASCII header line
//!
//! ```text
//! TGRID v1 <kind> <channels> <height> <width>\n
//! ```
//!
//! with `kind` one of `prob`, `multiclass` or `label`, followed by a
//! channel-major, row-major payload. Probability kinds store little-endian
//! `f32`; label grids store one `u8` per pixel.
//!
//! Values are held as `f64` in memory. Saving rounds to the nearest `f32`,
//! so anything that was loaded from a file round-trips bit-exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

const MAGIC: &str = "TGRID";
const VERSION: &str = "v1";
const MAX_HEADER: usize = 128;

/// Tolerance on the per-pixel channel sum of a [`MultiClassProb`].
pub const SUM_TOLERANCE: f64 = 1e-6;

/// Number of channels in a multi-class field.
pub const NUM_CLASSES: usize = 4;

/// Segmentation classes of the short-axis task.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Class {
    Background = 0,
    Rv = 1,
    My = 2,
    Lv = 3,
}

impl Class {
    pub const ALL: [Class; 4] = [Class::Background, Class::Rv, Class::My, Class::Lv];
    pub const FOREGROUND: [Class; 3] = [Class::Rv, Class::My, Class::Lv];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Class> {
        Class::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Class::Background => "bg",
            Class::Rv => "rv",
            Class::My => "my",
            Class::Lv => "lv",
        }
    }

    pub fn from_name(name: &str) -> Option<Class> {
        Class::ALL.into_iter().find(|c| c.name() == name)
    }
}

impl std::fmt::Display for Class {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn check_shape(height: usize, width: usize, len: usize) -> Result<()> {
    if height == 0 || width == 0 {
        return Err(Error::EmptyGrid);
    }
    if height * width != len {
        return Err(Error::ShapeMismatch(format!(
            "{height}x{width} grid needs {} values, got {len}",
            height * width
        )));
    }
    Ok(())
}

/// A single-channel probability grid, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbMap {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl ProbMap {
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        check_shape(height, width, values.len())?;
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::ValueOutOfRange { index, value });
        }
        Ok(ProbMap {
            height,
            width,
            values,
        })
    }

    /// A grid filled with one value.
    pub fn constant(height: usize, width: usize, value: f64) -> Result<Self> {
        ProbMap::new(height, width, vec![value; height * width])
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                values.push(f(r, c));
            }
        }
        ProbMap::new(height, width, values)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    /// Replaces one value. Fails if `value` leaves `[0, 1]`.
    pub fn set(&mut self, row: usize, col: usize, value: f64) -> Result<()> {
        let index = row * self.width + col;
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::ValueOutOfRange { index, value });
        }
        self.values[index] = value;
        Ok(())
    }

    /// Applies `f` to every value. The result must stay inside `[0, 1]`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<ProbMap> {
        ProbMap::new(
            self.height,
            self.width,
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }
}

/// Four-channel probability field indexed by [`Class`].
#[derive(Clone, Debug, PartialEq)]
pub struct MultiClassProb {
    channels: [ProbMap; NUM_CLASSES],
}

impl MultiClassProb {
    pub fn new(channels: [ProbMap; NUM_CLASSES]) -> Result<Self> {
        let (h, w) = (channels[0].height, channels[0].width);
        if channels.iter().any(|c| c.height != h || c.width != w) {
            return Err(Error::ShapeMismatch(
                "multi-class channels differ in shape".into(),
            ));
        }
        for index in 0..h * w {
            let sum: f64 = channels.iter().map(|c| c.values[index]).sum();
            if (sum - 1.0).abs() > SUM_TOLERANCE {
                return Err(Error::NotNormalized { index, sum });
            }
        }
        Ok(MultiClassProb { channels })
    }

    /// Builds a field from per-pixel class vectors, row-major.
    pub fn from_pixels(height: usize, width: usize, pixels: &[[f64; 4]]) -> Result<Self> {
        check_shape(height, width, pixels.len())?;
        let channels = std::array::from_fn(|c| {
            ProbMap {
                height,
                width,
                values: pixels.iter().map(|p| p[c]).collect(),
            }
        });
        for ch in &channels {
            ProbMap::new(height, width, ch.values.clone())?;
        }
        MultiClassProb::new(channels)
    }

    /// Exact one-hot encoding of a label mask.
    pub fn one_hot(mask: &LabelMask) -> Self {
        let channels = std::array::from_fn(|c| ProbMap {
            height: mask.height,
            width: mask.width,
            values: mask
                .labels
                .iter()
                .map(|&l| if l as usize == c { 1.0 } else { 0.0 })
                .collect(),
        });
        MultiClassProb { channels }
    }

    pub fn height(&self) -> usize {
        self.channels[0].height
    }

    pub fn width(&self) -> usize {
        self.channels[0].width
    }

    pub fn channel(&self, class: Class) -> &ProbMap {
        &self.channels[class.index()]
    }

    pub fn channels(&self) -> &[ProbMap; NUM_CLASSES] {
        &self.channels
    }

    pub fn into_channels(self) -> [ProbMap; NUM_CLASSES] {
        self.channels
    }

    /// Class probabilities at one pixel (row-major index).
    pub fn pixel(&self, index: usize) -> [f64; NUM_CLASSES] {
        std::array::from_fn(|c| self.channels[c].values[index])
    }
}

/// Discrete class-index mask. Binary masks use labels 0 and 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMask {
    height: usize,
    width: usize,
    labels: Vec<u8>,
}

impl LabelMask {
    pub fn new(height: usize, width: usize, labels: Vec<u8>) -> Result<Self> {
        check_shape(height, width, labels.len())?;
        if let Some((index, &label)) = labels
            .iter()
            .enumerate()
            .find(|(_, &l)| l as usize >= NUM_CLASSES)
        {
            return Err(Error::LabelOutOfRange { index, label });
        }
        Ok(LabelMask {
            height,
            width,
            labels,
        })
    }

    pub fn filled(height: usize, width: usize, label: u8) -> Result<Self> {
        LabelMask::new(height, width, vec![label; height * width])
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self> {
        let mut labels = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                labels.push(f(r, c));
            }
        }
        LabelMask::new(height, width, labels)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.labels[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, label: u8) -> Result<()> {
        let index = row * self.width + col;
        if label as usize >= NUM_CLASSES {
            return Err(Error::LabelOutOfRange { index, label });
        }
        self.labels[index] = label;
        Ok(())
    }

    /// The 0/1 probability map of a binary mask (any nonzero label counts as 1).
    pub fn to_prob_map(&self) -> ProbMap {
        ProbMap {
            height: self.height,
            width: self.width,
            values: self
                .labels
                .iter()
                .map(|&l| if l != 0 { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    pub fn count(&self, label: u8) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

/// Any of the three grid kinds a file can hold.
#[derive(Clone, Debug, PartialEq)]
pub enum Grid {
    Prob(ProbMap),
    MultiClass(MultiClassProb),
    Label(LabelMask),
}

impl Grid {
    fn kind(&self) -> &'static str {
        match self {
            Grid::Prob(_) => "prob",
            Grid::MultiClass(_) => "multiclass",
            Grid::Label(_) => "label",
        }
    }

    pub fn into_prob(self) -> Result<ProbMap> {
        match self {
            Grid::Prob(m) => Ok(m),
            other => Err(Error::MalformedHeader(format!(
                "expected a prob grid, found {}",
                other.kind()
            ))),
        }
    }

    pub fn into_multiclass(self) -> Result<MultiClassProb> {
        match self {
            Grid::MultiClass(m) => Ok(m),
            other => Err(Error::MalformedHeader(format!(
                "expected a multiclass grid, found {}",
                other.kind()
            ))),
        }
    }

    pub fn into_label(self) -> Result<LabelMask> {
        match self {
            Grid::Label(m) => Ok(m),
            other => Err(Error::MalformedHeader(format!(
                "expected a label grid, found {}",
                other.kind()
            ))),
        }
    }
}

impl From<ProbMap> for Grid {
    fn from(m: ProbMap) -> Self {
        Grid::Prob(m)
    }
}

impl From<MultiClassProb> for Grid {
    fn from(m: MultiClassProb) -> Self {
        Grid::MultiClass(m)
    }
}

impl From<LabelMask> for Grid {
    fn from(m: LabelMask) -> Self {
        Grid::Label(m)
    }
}

/// Serializes a grid to any writer.
pub fn write_grid<W: Write>(grid: &Grid, mut out: W) -> Result<()> {
    let (channels, h, w) = match grid {
        Grid::Prob(m) => (1, m.height, m.width),
        Grid::MultiClass(m) => (NUM_CLASSES, m.height(), m.width()),
        Grid::Label(m) => (1, m.height, m.width),
    };
    writeln!(out, "{MAGIC} {VERSION} {} {channels} {h} {w}", grid.kind())?;
    let mut payload = Vec::new();
    let mut push_floats = |values: &[f64]| {
        for &v in values {
            payload.extend_from_slice(&(v as f32).to_le_bytes());
        }
    };
    match grid {
        Grid::Prob(m) => push_floats(&m.values),
        Grid::MultiClass(m) => {
            for ch in &m.channels {
                push_floats(&ch.values);
            }
        }
        Grid::Label(m) => payload.extend_from_slice(&m.labels),
    }
    out.write_all(&payload)?;
    out.flush()?;
    Ok(())
}

/// Parses a grid from any reader.
pub fn read_grid<R: Read>(mut input: R) -> Result<Grid> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let newline = bytes
        .iter()
        .take(MAX_HEADER)
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::MalformedHeader("missing header line".into()))?;
    let header = std::str::from_utf8(&bytes[..newline])
        .map_err(|_| Error::MalformedHeader("header is not ASCII".into()))?;
    let fields: Vec<&str> = header.split(' ').collect();
    if fields.len() != 6 || fields[0] != MAGIC || fields[1] != VERSION {
        return Err(Error::MalformedHeader(format!("unrecognised header {header:?}")));
    }
    let parse = |s: &str, what: &str| -> Result<usize> {
        s.parse::<usize>()
            .map_err(|_| Error::MalformedHeader(format!("bad {what} {s:?}")))
    };
    let kind = fields[2];
    let channels = parse(fields[3], "channel count")?;
    let h = parse(fields[4], "height")?;
    let w = parse(fields[5], "width")?;
    if h == 0 || w == 0 {
        return Err(Error::EmptyGrid);
    }
    let expected_channels = match kind {
        "prob" | "label" => 1,
        "multiclass" => NUM_CLASSES,
        other => return Err(Error::MalformedHeader(format!("unknown kind {other:?}"))),
    };
    if channels != expected_channels {
        return Err(Error::MalformedHeader(format!(
            "kind {kind} needs {expected_channels} channels, header declares {channels}"
        )));
    }
    let pixels = h
        .checked_mul(w)
        .ok_or_else(|| Error::MalformedHeader("grid too large".into()))?;
    let elem = if kind == "label" { 1 } else { 4 };
    let expected = pixels * channels * elem;
    let payload = &bytes[newline + 1..];
    if payload.len() < expected {
        return Err(Error::TruncatedPayload {
            expected,
            found: payload.len(),
        });
    }
    if payload.len() > expected {
        return Err(Error::TrailingBytes(payload.len() - expected));
    }
    if kind == "label" {
        return Ok(Grid::Label(LabelMask::new(h, w, payload.to_vec())?));
    }
    let floats: Vec<f64> = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
        .collect();
    if kind == "prob" {
        return Ok(Grid::Prob(ProbMap::new(h, w, floats)?));
    }
    let mut chunks = floats.chunks_exact(pixels);
    let mut maps = Vec::with_capacity(NUM_CLASSES);
    for c in 0..NUM_CLASSES {
        let values = chunks.next().expect("payload length checked").to_vec();
        maps.push(ProbMap::new(h, w, values).map_err(|e| match e {
            Error::ValueOutOfRange { index, value } => Error::ValueOutOfRange {
                index: c * pixels + index,
                value,
            },
            e => e,
        })?);
    }
    let channels: [ProbMap; NUM_CLASSES] = maps.try_into().expect("four channels");
    Ok(Grid::MultiClass(MultiClassProb::new(channels)?))
}

pub fn load_grid(path: impl AsRef<Path>) -> Result<Grid> {
    read_grid(BufReader::new(File::open(path)?))
}

pub fn save_grid(grid: &Grid, path: impl AsRef<Path>) -> Result<()> {
    write_grid(grid, BufWriter::new(File::create(path)?))
}
