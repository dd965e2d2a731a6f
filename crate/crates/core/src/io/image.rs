use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use crate::error::{Error, Result};
use crate::num::Real;

/// Tag for the numeric space pixel values live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum ColorSpace {
    /// sRGB-encoded values taken as given, no linearization.
    #[default]
    Srgb,
}

/// Row-major, channel-interleaved RGB image with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
    color_space: ColorSpace,
}

impl<T: Real> ImageBuffer<T> {
    /// Wraps `data`, rejecting wrong lengths and values outside `[0, 1]`.
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height * 3 {
            return Err(Error::SizeMismatch(format!(
                "image {width}x{height} needs {} values, got {}",
                width * height * 3,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("pixel value at index {i}")));
        }
        if let Some(i) = data.iter().position(|&v| v < T::zero() || v > T::one()) {
            return Err(Error::Invalid(format!("pixel value at index {i} outside [0, 1]")));
        }
        Ok(Self { width, height, data, color_space: ColorSpace::Srgb })
    }

    /// Builds an image from arbitrary values, clamping each into `[0, 1]`.
    ///
    /// Panics on non-finite input or a length mismatch.
    pub fn from_clamped(width: usize, height: usize, mut data: Vec<T>) -> Self {
        assert_eq!(data.len(), width * height * 3, "image buffer length");
        for v in &mut data {
            assert!(v.is_finite(), "non-finite pixel value");
            *v = v.clamp(T::zero(), T::one());
        }
        Self { width, height, data, color_space: ColorSpace::Srgb }
    }

    pub fn filled(width: usize, height: usize, rgb: [T; 3]) -> Self {
        let data = (0..width * height).flat_map(|_| rgb).collect();
        Self::from_clamped(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn color_space(&self) -> ColorSpace {
        self.color_space
    }

    pub fn len_pixels(&self) -> usize {
        self.width * self.height
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [T; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn pixels(&self) -> impl ExactSizeIterator<Item = [T; 3]> + '_ {
        self.data.chunks_exact(3).map(|c| [c[0], c[1], c[2]])
    }

    pub fn same_size(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Quantizes to 8-bit RGB bytes, storing `v` as `round(v * 255)`.
    pub fn to_rgb8(&self) -> Vec<u8> {
        self.data
            .iter()
            .map(|v| (v.as_f64() * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect()
    }

    /// Inverse of [`ImageBuffer::to_rgb8`].
    pub fn from_rgb8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        let data = bytes.iter().map(|&b| T::lit(b as f64 / 255.0)).collect();
        Self::new(width, height, data)
    }

    /// Converts the scalar type.
    pub fn cast<U: Real>(&self) -> ImageBuffer<U> {
        ImageBuffer {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|v| U::lit(v.as_f64())).collect(),
            color_space: self.color_space,
        }
    }
}

/// Loads an 8- or 16-bit RGB/RGBA PNG; alpha is discarded.
pub fn load_image<T: Real>(path: impl AsRef<Path>) -> Result<ImageBuffer<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::ImageDecode(format!("{}: {e}", path.display())))?;
    let (color, depth) = reader.output_color_type();
    let channels = match color {
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => 4,
        other => return Err(Error::UnsupportedLayout(format!("{other:?}"))),
    };
    let bytes_per_sample = match depth {
        png::BitDepth::Eight => 1,
        png::BitDepth::Sixteen => 2,
        other => return Err(Error::UnsupportedBitDepth(other as u8)),
    };
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::ImageDecode("image too large".into()))?;
    let mut buf = vec![0u8; size];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::ImageDecode(format!("{}: {e}", path.display())))?;
    let (w, h) = (info.width as usize, info.height as usize);
    let stride = info.line_size;
    let full_scale = if bytes_per_sample == 1 { 255.0 } else { 65535.0 };
    let mut data = Vec::with_capacity(w * h * 3);
    for row in buf.chunks_exact(stride).take(h) {
        for px in 0..w {
            for c in 0..3 {
                let at = (px * channels + c) * bytes_per_sample;
                let raw = if bytes_per_sample == 1 {
                    row[at] as f64
                } else {
                    u16::from_be_bytes([row[at], row[at + 1]]) as f64
                };
                data.push(T::lit(raw / full_scale));
            }
        }
    }
    ImageBuffer::new(w, h, data)
}

/// Writes an 8-bit RGB PNG.
pub fn save_image<T: Real>(img: &ImageBuffer<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), img.width() as u32, img.height() as u32);
    encoder.set_color(png::ColorType::Rgb);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder
        .write_header()
        .map_err(|e| Error::ImageEncode(e.to_string()))?;
    writer
        .write_image_data(&img.to_rgb8())
        .map_err(|e| Error::ImageEncode(e.to_string()))?;
    writer.finish().map_err(|e| Error::ImageEncode(e.to_string()))
}

/// Reads only the PNG header, returning `(width, height)`.
pub fn image_dimensions(path: impl AsRef<Path>) -> Result<(usize, usize)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = png::Decoder::new(BufReader::new(file))
        .read_info()
        .map_err(|e| Error::ImageDecode(format!("{}: {e}", path.display())))?;
    let (w, h) = reader.info().size();
    Ok((w as usize, h as usize))
}
