//! 8-bit binary PGM (P5) images with intensities mapped linearly to [0, 1].

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use image::codecs::pnm::{PnmDecoder, PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ColorType, DynamicImage, ExtendedColorType, ImageEncoder};

use crate::error::{EbfError, Result};
use crate::spectral::ImageGrid;

fn pgm_err(e: image::ImageError) -> EbfError {
    match e {
        image::ImageError::IoError(io) => EbfError::Io(io),
        other => EbfError::Pgm(other.to_string()),
    }
}

/// Reads an 8-bit grayscale PGM; pixel value v maps to v/255.
pub fn read_pgm(path: &Path) -> Result<ImageGrid> {
    let reader = BufReader::new(File::open(path)?);
    let decoder = PnmDecoder::new(reader).map_err(pgm_err)?;
    let img = DynamicImage::from_decoder(decoder).map_err(pgm_err)?;
    if img.color() != ColorType::L8 {
        return Err(EbfError::Pgm(format!("{}: expected 8-bit grayscale, got {:?}", path.display(), img.color())));
    }
    let gray = img.into_luma8();
    let (w, h) = gray.dimensions();
    let pixels = gray.into_raw().into_iter().map(|v| f64::from(v) / 255.0).collect();
    ImageGrid::new(h as usize, w as usize, pixels)
}

/// Quantizes to 8 bits, clamping to [0, 1].
pub fn to_bytes(img: &ImageGrid) -> Vec<u8> {
    img.pixels().iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8).collect()
}

/// Writes a binary P5 graymap.
pub fn write_pgm(path: &Path, img: &ImageGrid) -> Result<()> {
    let out = BufWriter::new(File::create(path)?);
    PnmEncoder::new(out)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(&to_bytes(img), img.width() as u32, img.height() as u32, ExtendedColorType::L8)
        .map_err(pgm_err)
}
