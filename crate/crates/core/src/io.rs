//! Label-map codecs, PNG image I/O and the on-disk dataset layout.
//!
//! Layout: `<root>/images/<id>.png` and `<root>/gt/<id>/<k>.png|csv` with
//! `k = 0..#GT`. Label maps are 16-bit grayscale PNG or CSV (one text line per
//! pixel row).

use std::fmt::Write as _;
use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageBuffer, ImageFormat, Luma};

use crate::error::{Error, Result};
use crate::raster::{DatasetEntry, Image, LabelMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LabelFormat {
    Png16,
    Csv,
}

impl LabelFormat {
    pub fn extension(self) -> &'static str {
        match self {
            LabelFormat::Png16 => "png",
            LabelFormat::Csv => "csv",
        }
    }

    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "png" => Some(LabelFormat::Png16),
            "csv" => Some(LabelFormat::Csv),
            _ => None,
        }
    }
}

impl std::str::FromStr for LabelFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "png" | "png16" => Ok(LabelFormat::Png16),
            "csv" => Ok(LabelFormat::Csv),
            other => Err(Error::param("format", format!("unknown label format `{other}`"))),
        }
    }
}

pub fn decode_label_map(bytes: &[u8], format: LabelFormat) -> Result<LabelMap> {
    match format {
        LabelFormat::Csv => decode_csv(bytes),
        LabelFormat::Png16 => decode_png16(bytes),
    }
}

pub fn encode_label_map(map: &LabelMap, format: LabelFormat) -> Result<Vec<u8>> {
    match format {
        LabelFormat::Csv => Ok(encode_csv(map).into_bytes()),
        LabelFormat::Png16 => encode_png16(map),
    }
}

fn decode_csv(bytes: &[u8]) -> Result<LabelMap> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::decode("csv", e.to_string()))?;
    let mut width = None;
    let mut height = 0;
    let mut labels = Vec::new();
    for (row, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let before = labels.len();
        for field in line.split(',') {
            let field = field.trim();
            if field.starts_with('-') {
                return Err(Error::decode("csv", format!("negative label `{field}` on row {row}")));
            }
            let v: u32 = field
                .parse()
                .map_err(|_| Error::decode("csv", format!("bad label `{field}` on row {row}")))?;
            labels.push(v);
        }
        let w = labels.len() - before;
        match width {
            None => width = Some(w),
            Some(expected) if expected != w => {
                return Err(Error::decode(
                    "csv",
                    format!("row {row} has {w} columns, expected {expected}"),
                ));
            }
            _ => {}
        }
        height += 1;
    }
    let width = width.ok_or_else(|| Error::decode("csv", "empty payload"))?;
    LabelMap::new(width, height, labels)
}

fn encode_csv(map: &LabelMap) -> String {
    let mut out = String::with_capacity(map.len() * 4);
    for row in map.rows() {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

fn decode_png16(bytes: &[u8]) -> Result<LabelMap> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| Error::decode("png16", e.to_string()))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let labels = match img {
        DynamicImage::ImageLuma16(buf) => buf.into_raw().into_iter().map(u32::from).collect(),
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(u32::from).collect(),
        other => {
            return Err(Error::decode(
                "png16",
                format!("expected grayscale label image, found {:?}", other.color()),
            ))
        }
    };
    LabelMap::new(w, h, labels)
}

fn encode_png16(map: &LabelMap) -> Result<Vec<u8>> {
    let mut raw = Vec::with_capacity(map.len());
    for &l in map.labels() {
        let v = u16::try_from(l)
            .map_err(|_| Error::param("labels", format!("label {l} exceeds 65535 for png16")))?;
        raw.push(v);
    }
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(map.width() as u32, map.height() as u32, raw)
            .expect("buffer length matches dimensions");
    let mut out = Cursor::new(Vec::new());
    buf.write_to(&mut out, ImageFormat::Png)
        .map_err(|e| Error::decode("png16", e.to_string()))?;
    Ok(out.into_inner())
}

pub fn decode_image_png(bytes: &[u8]) -> Result<Image> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| Error::decode("png", e.to_string()))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(buf) => Image::new(w, h, 1, buf.into_raw()),
        DynamicImage::ImageLuma16(_) | DynamicImage::ImageLumaA8(_) | DynamicImage::ImageLumaA16(_) => {
            Image::new(w, h, 1, img.to_luma8().into_raw())
        }
        other => Image::new(w, h, 3, other.to_rgb8().into_raw()),
    }
}

pub fn encode_image_png(image: &Image) -> Result<Vec<u8>> {
    let (w, h) = (image.width() as u32, image.height() as u32);
    let dynamic = if image.channels() == 1 {
        DynamicImage::ImageLuma8(
            ImageBuffer::from_raw(w, h, image.data().to_vec()).expect("length checked"),
        )
    } else {
        DynamicImage::ImageRgb8(
            ImageBuffer::from_raw(w, h, image.data().to_vec()).expect("length checked"),
        )
    };
    let mut out = Cursor::new(Vec::new());
    dynamic
        .write_to(&mut out, ImageFormat::Png)
        .map_err(|e| Error::decode("png", e.to_string()))?;
    Ok(out.into_inner())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn read_image(path: &Path) -> Result<Image> {
    decode_image_png(&fs::read(path).map_err(io_err(path))?)
}

pub fn write_image(path: &Path, image: &Image) -> Result<()> {
    fs::write(path, encode_image_png(image)?).map_err(io_err(path))
}

/// Reads a label map; the format is taken from the file extension.
pub fn read_label_map(path: &Path) -> Result<LabelMap> {
    let format = LabelFormat::from_path(path).ok_or_else(|| Error::Dataset {
        path: path.to_path_buf(),
        reason: "label maps must be .png or .csv".into(),
    })?;
    decode_label_map(&fs::read(path).map_err(io_err(path))?, format)
}

pub fn write_label_map(path: &Path, map: &LabelMap, format: LabelFormat) -> Result<()> {
    fs::write(path, encode_label_map(map, format)?).map_err(io_err(path))
}

fn sorted_dir(path: &Path) -> Result<Vec<PathBuf>> {
    let mut entries: Vec<PathBuf> = fs::read_dir(path)
        .map_err(io_err(path))?
        .map(|e| e.map(|e| e.path()).map_err(io_err(path)))
        .collect::<Result<_>>()?;
    entries.sort();
    Ok(entries)
}

/// Loads every entry of a dataset directory, ordered by id.
pub fn load_dataset(root: &Path) -> Result<Vec<DatasetEntry>> {
    let images_dir = root.join("images");
    let gt_dir = root.join("gt");
    let mut entries = Vec::new();
    for path in sorted_dir(&images_dir)? {
        if path.extension().and_then(|e| e.to_str()).map(|e| e.eq_ignore_ascii_case("png")) != Some(true) {
            continue;
        }
        let id = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::Dataset {
                path: path.clone(),
                reason: "non UTF-8 image name".into(),
            })?
            .to_string();
        let image = read_image(&path)?;
        let entry_gt_dir = gt_dir.join(&id);
        let mut indexed = Vec::new();
        for gt_path in sorted_dir(&entry_gt_dir)? {
            if LabelFormat::from_path(&gt_path).is_none() {
                continue;
            }
            let k: usize = gt_path
                .file_stem()
                .and_then(|s| s.to_str())
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Dataset {
                    path: gt_path.clone(),
                    reason: "ground-truth files must be named <k>.png or <k>.csv".into(),
                })?;
            indexed.push((k, read_label_map(&gt_path)?));
        }
        indexed.sort_by_key(|(k, _)| *k);
        if indexed.iter().enumerate().any(|(i, (k, _))| i != *k) {
            return Err(Error::Dataset {
                path: entry_gt_dir,
                reason: "ground-truth indices must be contiguous from 0".into(),
            });
        }
        let gts = indexed.into_iter().map(|(_, m)| m).collect();
        let entry = DatasetEntry::new(id, image, gts).map_err(|e| Error::Dataset {
            path: path.clone(),
            reason: e.to_string(),
        })?;
        entries.push(entry);
    }
    Ok(entries)
}

/// Writes entries in the dataset layout under `root` (created if missing).
pub fn save_dataset(root: &Path, entries: &[DatasetEntry], format: LabelFormat) -> Result<()> {
    let images_dir = root.join("images");
    fs::create_dir_all(&images_dir).map_err(io_err(&images_dir))?;
    let gt_root = root.join("gt");
    fs::create_dir_all(&gt_root).map_err(io_err(&gt_root))?;
    for entry in entries {
        write_image(&images_dir.join(format!("{}.png", entry.id)), &entry.image)?;
        let dir = gt_root.join(&entry.id);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        for (k, gt) in entry.ground_truths.iter().enumerate() {
            write_label_map(&dir.join(format!("{k}.{}", format.extension())), gt, format)?;
        }
    }
    Ok(())
}
