//! On-disk formats: PNG rasters, class-ID PNG masks with an instance sidecar,
//! ENVI cubes (text header + raw binary) and JSON documents.
//!
//! Instance sidecar (`<mask stem>.instances.json`): row-major run-length
//! encoding of the instance channel,
//! `{"version":1,"width":W,"height":H,"runs":[[instance_id, run_length], ...]}`.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageBuffer, Luma, Rgb};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::raster::{Cube, FloatCube, HyperCube, LabelMask, RasterImage, ValueRange};
use super::ImagingError;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ImagingError + '_ {
    move |source| ImagingError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, ImagingError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| ImagingError::Json {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Pretty-printed JSON with a trailing newline. Output is a pure function of
/// the value, so reruns produce identical bytes.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), ImagingError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| ImagingError::Json {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    text.push('\n');
    ensure_parent(path)?;
    fs::write(path, text).map_err(io_err(path))
}

pub(crate) fn ensure_parent(path: &Path) -> Result<(), ImagingError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
    }
    Ok(())
}

/// Reads an 8-bit (or 16-bit) PNG. Gray and RGB layouts are kept, alpha is
/// dropped.
pub fn read_png(path: &Path) -> Result<RasterImage, ImagingError> {
    let img = image::open(path).map_err(|e| ImagingError::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(b) => RasterImage::from_u8(w, h, 1, b.as_raw()),
        DynamicImage::ImageLuma16(b) => RasterImage::new(
            w,
            h,
            1,
            b.as_raw().iter().map(|&v| f32::from(v)).collect(),
            ValueRange::U16,
        ),
        DynamicImage::ImageRgb16(_) | DynamicImage::ImageRgba16(_) => {
            let b = img.to_rgb16();
            RasterImage::new(
                w,
                h,
                3,
                b.as_raw().iter().map(|&v| f32::from(v)).collect(),
                ValueRange::U16,
            )
        }
        other => RasterImage::from_u8(w, h, 3, other.to_rgb8().as_raw()),
    }
}

/// Writes a 1- or 3-channel raster as an 8-bit PNG, quantizing non-u8 ranges.
pub fn write_png(path: &Path, img: &RasterImage) -> Result<(), ImagingError> {
    let samples = img.to_u8_samples();
    let (w, h) = (img.width() as u32, img.height() as u32);
    ensure_parent(path)?;
    let result = match img.channels() {
        1 => ImageBuffer::<Luma<u8>, _>::from_raw(w, h, samples).map(|b| b.save(path)),
        3 => ImageBuffer::<Rgb<u8>, _>::from_raw(w, h, samples).map(|b| b.save(path)),
        c => {
            return Err(ImagingError::Image {
                path: path.to_path_buf(),
                message: format!("cannot write {c}-channel raster as PNG"),
            })
        }
    };
    match result {
        Some(Ok(())) => Ok(()),
        Some(Err(e)) => Err(ImagingError::Image {
            path: path.to_path_buf(),
            message: e.to_string(),
        }),
        None => unreachable!("buffer length matches dimensions"),
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceSidecar {
    version: u32,
    width: usize,
    height: usize,
    runs: Vec<[u32; 2]>,
}

pub fn instance_sidecar_path(mask_path: &Path) -> PathBuf {
    let stem = mask_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    mask_path.with_file_name(format!("{stem}.instances.json"))
}

/// Writes the class channel as a single-channel PNG and the instance channel
/// as a run-length sidecar next to it.
pub fn write_mask(path: &Path, mask: &LabelMask) -> Result<(), ImagingError> {
    ensure_parent(path)?;
    ImageBuffer::<Luma<u8>, _>::from_raw(
        mask.width() as u32,
        mask.height() as u32,
        mask.class_ids().to_vec(),
    )
    .expect("mask buffer length matches dimensions")
    .save(path)
    .map_err(|e| ImagingError::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut runs: Vec<[u32; 2]> = Vec::new();
    for &id in mask.instance_ids() {
        match runs.last_mut() {
            Some(r) if r[0] == id => r[1] += 1,
            _ => runs.push([id, 1]),
        }
    }
    write_json(
        &instance_sidecar_path(path),
        &InstanceSidecar {
            version: 1,
            width: mask.width(),
            height: mask.height(),
            runs,
        },
    )
}

/// Reads a class-ID PNG; the instance sidecar is loaded when present.
pub fn read_mask(path: &Path) -> Result<LabelMask, ImagingError> {
    let img = image::open(path).map_err(|e| ImagingError::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let gray = img.to_luma8();
    let (w, h) = (gray.width() as usize, gray.height() as usize);
    let classes = gray.into_raw();
    let sidecar = instance_sidecar_path(path);
    let instances = if sidecar.exists() {
        let s: InstanceSidecar = read_json(&sidecar)?;
        if (s.width, s.height) != (w, h) {
            return Err(ImagingError::ShapeMismatch(format!(
                "instance sidecar is {}x{}, mask is {w}x{h}",
                s.width, s.height
            )));
        }
        let mut v = Vec::with_capacity(w * h);
        for [id, len] in s.runs {
            v.extend(std::iter::repeat_n(id, len as usize));
        }
        Some(v)
    } else {
        None
    };
    LabelMask::from_parts(w, h, classes, instances)
}

/// Sample type of an ENVI cube (`data type` header field).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnviDataType {
    U8 = 1,
    F32 = 4,
    U16 = 12,
}

impl EnviDataType {
    fn from_code(code: u32) -> Option<Self> {
        match code {
            1 => Some(Self::U8),
            4 => Some(Self::F32),
            12 => Some(Self::U16),
            _ => None,
        }
    }

    fn size(self) -> usize {
        match self {
            Self::U8 => 1,
            Self::U16 => 2,
            Self::F32 => 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interleave {
    Bsq,
    Bil,
    Bip,
}

/// Parsed ENVI header.
#[derive(Clone, Debug, PartialEq)]
pub struct EnviHeader {
    pub samples: usize,
    pub lines: usize,
    pub bands: usize,
    pub header_offset: usize,
    pub data_type: EnviDataType,
    pub interleave: Interleave,
    pub big_endian: bool,
    pub wavelengths_nm: Option<Vec<f64>>,
}

impl EnviHeader {
    pub fn parse(text: &str) -> Result<Self, ImagingError> {
        let bad = |m: String| ImagingError::Envi(m);
        let mut lines = text.lines();
        match lines.next() {
            Some(first) if first.trim() == "ENVI" => {}
            _ => return Err(bad("header must start with 'ENVI'".into())),
        }
        let mut fields: BTreeMap<String, String> = BTreeMap::new();
        let mut pending: Option<(String, String)> = None;
        for line in lines {
            if let Some((key, mut value)) = pending.take() {
                value.push(' ');
                value.push_str(line.trim());
                if value.contains('}') {
                    fields.insert(key, value);
                } else {
                    pending = Some((key, value));
                }
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                continue;
            };
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim().to_string();
            if value.starts_with('{') && !value.contains('}') {
                pending = Some((key, value));
            } else {
                fields.insert(key, value);
            }
        }
        if pending.is_some() {
            return Err(bad("unterminated '{' block".into()));
        }
        let int = |key: &str, default: Option<usize>| -> Result<usize, ImagingError> {
            match fields.get(key) {
                Some(v) => v
                    .parse()
                    .map_err(|_| ImagingError::Envi(format!("field '{key}' is not an integer: {v}"))),
                None => default.ok_or_else(|| ImagingError::Envi(format!("missing field '{key}'"))),
            }
        };
        let samples = int("samples", None)?;
        let lines_n = int("lines", None)?;
        let bands = int("bands", None)?;
        let header_offset = int("header offset", Some(0))?;
        let code = int("data type", None)? as u32;
        let data_type = EnviDataType::from_code(code)
            .ok_or_else(|| bad(format!("unsupported data type {code}")))?;
        let interleave = match fields
            .get("interleave")
            .map(|s| s.to_ascii_lowercase())
            .as_deref()
        {
            None | Some("bsq") => Interleave::Bsq,
            Some("bil") => Interleave::Bil,
            Some("bip") => Interleave::Bip,
            Some(other) => return Err(bad(format!("unknown interleave '{other}'"))),
        };
        let big_endian = match int("byte order", Some(0))? {
            0 => false,
            1 => true,
            o => return Err(bad(format!("byte order must be 0 or 1, got {o}"))),
        };
        let wavelengths_nm = match fields.get("wavelength") {
            None => None,
            Some(v) => {
                let inner = v.trim().trim_start_matches('{').trim_end_matches('}');
                let parsed: Result<Vec<f64>, _> = inner
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::parse::<f64>)
                    .collect();
                Some(parsed.map_err(|_| bad("malformed wavelength list".into()))?)
            }
        };
        Ok(Self {
            samples,
            lines: lines_n,
            bands,
            header_offset,
            data_type,
            interleave,
            big_endian,
            wavelengths_nm,
        })
    }

    pub fn render(&self) -> String {
        let mut s = String::from("ENVI\n");
        s.push_str("description = {spectral-transfer cube}\n");
        s.push_str(&format!("samples = {}\n", self.samples));
        s.push_str(&format!("lines = {}\n", self.lines));
        s.push_str(&format!("bands = {}\n", self.bands));
        s.push_str(&format!("header offset = {}\n", self.header_offset));
        s.push_str("file type = ENVI Standard\n");
        s.push_str(&format!("data type = {}\n", self.data_type as u32));
        let il = match self.interleave {
            Interleave::Bsq => "bsq",
            Interleave::Bil => "bil",
            Interleave::Bip => "bip",
        };
        s.push_str(&format!("interleave = {il}\n"));
        s.push_str(&format!("byte order = {}\n", u8::from(self.big_endian)));
        if let Some(w) = &self.wavelengths_nm {
            s.push_str("wavelength units = Nanometers\n");
            let list: Vec<String> = w.iter().map(|v| format!("{v:.3}")).collect();
            s.push_str(&format!("wavelength = {{{}}}\n", list.join(", ")));
        }
        s
    }
}

/// A cube read from disk, typed by its stored sample format.
#[derive(Clone, Debug)]
pub enum EnviCube {
    U16(HyperCube),
    F32(FloatCube),
}

impl EnviCube {
    /// Float view; 16-bit samples are divided by `u16_divisor`.
    pub fn into_float(self, u16_divisor: f64) -> FloatCube {
        match self {
            EnviCube::U16(c) => c.to_float(u16_divisor),
            EnviCube::F32(c) => c,
        }
    }

    pub fn size(&self) -> (usize, usize) {
        match self {
            EnviCube::U16(c) => (c.width(), c.height()),
            EnviCube::F32(c) => (c.width(), c.height()),
        }
    }
}

/// Binary file accompanying a header: `<stem>.raw` is written by this crate;
/// `.img`, `.dat`, `.bsq` and the bare stem are accepted when reading.
pub fn envi_data_path(header_path: &Path) -> PathBuf {
    header_path.with_extension("raw")
}

fn locate_data_file(header_path: &Path) -> Option<PathBuf> {
    ["raw", "img", "dat", "bsq"]
        .iter()
        .map(|ext| header_path.with_extension(ext))
        .chain(std::iter::once(header_path.with_extension("")))
        .find(|p| p.is_file())
}

pub fn read_envi(header_path: &Path) -> Result<EnviCube, ImagingError> {
    let text = fs::read_to_string(header_path).map_err(io_err(header_path))?;
    let hdr = EnviHeader::parse(&text)?;
    let data_path = locate_data_file(header_path).ok_or_else(|| {
        ImagingError::Envi(format!("no data file next to {}", header_path.display()))
    })?;
    let bytes = fs::read(&data_path).map_err(io_err(&data_path))?;
    let (w, h, b) = (hdr.samples, hdr.lines, hdr.bands);
    let n = w * h * b;
    let need = hdr.header_offset + n * hdr.data_type.size();
    if bytes.len() < need {
        return Err(ImagingError::Envi(format!(
            "{} holds {} bytes, header implies {need}",
            data_path.display(),
            bytes.len()
        )));
    }
    let body = &bytes[hdr.header_offset..need];
    // file order index -> band-sequential index
    let to_bsq = |i: usize| -> usize {
        match hdr.interleave {
            Interleave::Bsq => i,
            Interleave::Bil => {
                let (x, rest) = (i % w, i / w);
                let (band, y) = (rest % b, rest / b);
                band * w * h + y * w + x
            }
            Interleave::Bip => {
                let (band, px) = (i % b, i / b);
                band * w * h + px
            }
        }
    };
    match hdr.data_type {
        EnviDataType::U16 => {
            let mut data = vec![0u16; n];
            for (i, c) in body.chunks_exact(2).enumerate() {
                let v = if hdr.big_endian {
                    u16::from_be_bytes([c[0], c[1]])
                } else {
                    u16::from_le_bytes([c[0], c[1]])
                };
                data[to_bsq(i)] = v;
            }
            Ok(EnviCube::U16(HyperCube::new(w, h, b, data, hdr.wavelengths_nm)?))
        }
        EnviDataType::U8 => {
            let mut data = vec![0u16; n];
            for (i, &v) in body.iter().enumerate() {
                data[to_bsq(i)] = u16::from(v);
            }
            Ok(EnviCube::U16(HyperCube::new(w, h, b, data, hdr.wavelengths_nm)?))
        }
        EnviDataType::F32 => {
            let mut data = vec![0f32; n];
            for (i, c) in body.chunks_exact(4).enumerate() {
                let arr = [c[0], c[1], c[2], c[3]];
                data[to_bsq(i)] = if hdr.big_endian {
                    f32::from_be_bytes(arr)
                } else {
                    f32::from_le_bytes(arr)
                };
            }
            Ok(EnviCube::F32(FloatCube::new(w, h, b, data, hdr.wavelengths_nm)?))
        }
    }
}

fn write_envi_bytes(
    header_path: &Path,
    hdr: &EnviHeader,
    write_body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<(), ImagingError> {
    ensure_parent(header_path)?;
    fs::write(header_path, hdr.render()).map_err(io_err(header_path))?;
    let data_path = envi_data_path(header_path);
    let file = fs::File::create(&data_path).map_err(io_err(&data_path))?;
    let mut out = BufWriter::new(file);
    write_body(&mut out).map_err(io_err(&data_path))?;
    out.flush().map_err(io_err(&data_path))
}

/// Writes a 16-bit cube as little-endian BSQ (`<stem>.hdr` + `<stem>.raw`).
pub fn write_envi_u16(header_path: &Path, cube: &HyperCube) -> Result<(), ImagingError> {
    let hdr = EnviHeader {
        samples: cube.width(),
        lines: cube.height(),
        bands: cube.bands(),
        header_offset: 0,
        data_type: EnviDataType::U16,
        interleave: Interleave::Bsq,
        big_endian: false,
        wavelengths_nm: cube.wavelengths_nm().map(<[f64]>::to_vec),
    };
    write_envi_bytes(header_path, &hdr, |out| {
        for v in cube.data() {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    })
}

/// Writes a float cube as little-endian BSQ float32.
pub fn write_envi_f32(header_path: &Path, cube: &FloatCube) -> Result<(), ImagingError> {
    let hdr = EnviHeader {
        samples: cube.width(),
        lines: cube.height(),
        bands: cube.bands(),
        header_offset: 0,
        data_type: EnviDataType::F32,
        interleave: Interleave::Bsq,
        big_endian: false,
        wavelengths_nm: cube.wavelengths_nm().map(<[f64]>::to_vec),
    };
    write_envi_bytes(header_path, &hdr, |out| {
        for v in cube.data() {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    })
}
