//! Binary persistence for [`EmbeddingModel`].
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! offset  size      field
//! 0       8         magic  b"CBSGNS\0\0"
//! 8       4         format version (u32, currently 1)
//! 12      8         vocabulary size V (u64)
//! 20      8         dimension d (u64)
//! 28      8         min_count (u64)
//! 36      8         config length C (u64)
//! 44      C         training config as UTF-8 JSON
//! ..      8         epoch count E (u64)
//! ..      8·E       mean loss per epoch (f64)
//! then V rows, in vocabulary index order:
//!         4         word length W (u32)
//!         W         word bytes (UTF-8)
//!         8         frequency (u64)
//!         8·d       input vector (f64)
//!         8·d       output vector (f64)
//! ```

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{EmbeddingModel, SkipGramConfig, Vocabulary};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"CBSGNS\0\0";
pub const FORMAT_VERSION: u32 = 1;

fn format_err(msg: impl Into<String>) -> Error {
    Error::ModelFormat(msg.into())
}

pub fn save_model(model: &EmbeddingModel, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_model(model, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_model<W: Write>(model: &EmbeddingModel, w: &mut W) -> Result<()> {
    let d = model.dimension;
    let config = serde_json::to_vec(&model.config)?;
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    for n in [model.vocab.len(), d, model.vocab.min_count, config.len()] {
        w.write_all(&(n as u64).to_le_bytes())?;
    }
    w.write_all(&config)?;
    w.write_all(&(model.epoch_losses.len() as u64).to_le_bytes())?;
    for loss in &model.epoch_losses {
        w.write_all(&loss.to_le_bytes())?;
    }
    for (i, word) in model.vocab.words.iter().enumerate() {
        w.write_all(&(word.len() as u32).to_le_bytes())?;
        w.write_all(word.as_bytes())?;
        w.write_all(&model.vocab.frequencies[i].to_le_bytes())?;
        for x in &model.input[i * d..(i + 1) * d] {
            w.write_all(&x.to_le_bytes())?;
        }
        for x in &model.output[i * d..(i + 1) * d] {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn load_model(path: &Path) -> Result<EmbeddingModel> {
    read_model(&mut BufReader::new(File::open(path)?))
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)
        .map_err(|e| format_err(format!("truncated model file: {e}")))?;
    Ok(buf)
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    Ok(u64::from_le_bytes(read_array(r)?))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_le_bytes(read_array(r)?))
}

fn read_bytes<R: Read>(r: &mut R, len: usize) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    r.take(len as u64).read_to_end(&mut buf)?;
    if buf.len() != len {
        return Err(format_err("truncated model file"));
    }
    Ok(buf)
}

pub fn read_model<R: Read>(r: &mut R) -> Result<EmbeddingModel> {
    if &read_array::<8, _>(r)? != MAGIC {
        return Err(format_err("not an embedding model (bad magic)"));
    }
    let version = u32::from_le_bytes(read_array(r)?);
    if version != FORMAT_VERSION {
        return Err(format_err(format!("unsupported model format version {version}")));
    }
    let vocab_len = read_u64(r)? as usize;
    let d = read_u64(r)? as usize;
    let min_count = read_u64(r)? as usize;
    let config_len = read_u64(r)? as usize;
    let config: SkipGramConfig = serde_json::from_slice(&read_bytes(r, config_len)?)?;
    if d == 0 || d != config.dimension {
        return Err(format_err(format!(
            "dimension {d} disagrees with stored config ({})",
            config.dimension
        )));
    }
    let epochs = read_u64(r)? as usize;
    let epoch_losses = (0..epochs).map(|_| read_f64(r)).collect::<Result<Vec<_>>>()?;

    let mut words = Vec::with_capacity(vocab_len);
    let mut frequencies = Vec::with_capacity(vocab_len);
    let mut index = HashMap::with_capacity(vocab_len);
    let mut input = Vec::with_capacity(vocab_len * d);
    let mut output = Vec::with_capacity(vocab_len * d);
    for i in 0..vocab_len {
        let len = u32::from_le_bytes(read_array(r)?) as usize;
        let word = String::from_utf8(read_bytes(r, len)?)
            .map_err(|_| format_err(format!("row {i}: word is not UTF-8")))?;
        if index.insert(word.clone(), i as u32).is_some() {
            return Err(format_err(format!("row {i}: duplicate word {word:?}")));
        }
        words.push(word);
        frequencies.push(read_u64(r)?);
        for _ in 0..d {
            input.push(read_f64(r)?);
        }
        for _ in 0..d {
            output.push(read_f64(r)?);
        }
    }
    if input.iter().chain(&output).any(|x| !x.is_finite()) {
        return Err(format_err("model contains non-finite vector entries"));
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(format_err("trailing bytes after last row"));
    }
    Ok(EmbeddingModel {
        vocab: Vocabulary {
            words,
            frequencies,
            index,
            min_count,
        },
        dimension: d,
        input,
        output,
        config,
        epoch_losses,
    })
}
