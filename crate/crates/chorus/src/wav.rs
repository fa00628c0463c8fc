//! WAV reading (any PCM width or float, downmixed to mono) and 32-bit float
//! writing.

use std::path::Path;

use chorus_core::dsp::Waveform;
use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::{Error, Result};

pub fn read(path: &Path) -> Result<Waveform> {
    let wav = |source| Error::Wav {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = WavReader::open(path).map_err(wav)?;
    let spec = reader.spec();
    let interleaved: Vec<f32> = match spec.sample_format {
        SampleFormat::Float => reader.samples::<f32>().collect::<Result<_, _>>().map_err(wav)?,
        SampleFormat::Int => {
            let scale = 1.0 / (1u64 << (spec.bits_per_sample - 1)) as f32;
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f32 * scale))
                .collect::<Result<_, _>>()
                .map_err(wav)?
        }
    };
    let ch = usize::from(spec.channels.max(1));
    let mono = if ch == 1 {
        interleaved
    } else {
        interleaved.chunks(ch).map(|f| f.iter().sum::<f32>() / ch as f32).collect()
    };
    Ok(Waveform::new(mono, spec.sample_rate)?)
}

pub fn write(path: &Path, wave: &Waveform) -> Result<()> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: wave.sample_rate,
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let wav = |source| Error::Wav {
        path: path.to_path_buf(),
        source,
    };
    let mut w = WavWriter::create(path, spec).map_err(wav)?;
    for &s in &wave.samples {
        w.write_sample(s).map_err(wav)?;
    }
    w.finalize().map_err(wav)
}
