//! Seeded synthetic corpora with learnable chorus structure in lyrics,
//! chords and audio.
//!
//! Every song is verse material interleaved with a chorus block repeated
//! `chorus_repeats` times. Chorus repeats share a text template (with light
//! word substitutions), use a chorus chord loop, and are rendered louder and
//! an octave higher than the verses. A pool of short stock phrases is shared
//! across songs so that keywords recur in many songs' lyrics.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{Corpus, LyricLine, Song};
use crate::dsp::{ChordSequence, ChordSymbol, Waveform};
use crate::rng::SeededRng;
use crate::{math, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub songs: usize,
    pub verse_vocab: usize,
    pub chorus_vocab: usize,
    /// Words shared by the two vocabularies.
    pub vocab_overlap: usize,
    pub lines_per_song: usize,
    pub chorus_block: usize,
    pub chorus_repeats: usize,
    /// Number of distinct four-chord loops.
    pub chord_styles: usize,
    pub chords_per_line: usize,
    pub sample_rate: u32,
    /// Probability that a token comes from the other section's vocabulary.
    pub lyric_noise: f64,
    /// Per-token substitution probability in chorus repeats.
    pub repeat_noise: f64,
    /// Probability that a verse line copies an earlier verse line.
    pub verse_repeat: f64,
    /// Per-chord substitution probability.
    pub chord_noise: f64,
    /// Size of the cross-song stock phrase pool.
    pub phrases: usize,
    /// Probability that the chorus carries a stock phrase as its hook.
    pub hook_prob: f64,
    /// Probability that a verse line carries a stock phrase.
    pub verse_phrase_prob: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            songs: 200,
            verse_vocab: 400,
            chorus_vocab: 400,
            vocab_overlap: 200,
            lines_per_song: 16,
            chorus_block: 4,
            chorus_repeats: 2,
            chord_styles: 12,
            chords_per_line: 4,
            sample_rate: 8000,
            lyric_noise: 0.35,
            repeat_noise: 0.1,
            verse_repeat: 0.3,
            chord_noise: 0.25,
            phrases: 40,
            hook_prob: 0.8,
            verse_phrase_prob: 0.3,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.songs == 0 || self.lines_per_song == 0 {
            return Err(Error::Config("songs and lines_per_song must be positive".into()));
        }
        if self.chorus_block == 0 || self.chorus_repeats < 2 {
            return Err(Error::Config(
                "chorus block must be non-empty and repeated at least twice".into(),
            ));
        }
        if self.chorus_block * self.chorus_repeats > self.lines_per_song {
            return Err(Error::Config(format!(
                "chorus block {} x {} does not fit in {} lines",
                self.chorus_block, self.chorus_repeats, self.lines_per_song
            )));
        }
        if self.verse_vocab == 0 || self.chorus_vocab == 0 || self.vocab_overlap > self.verse_vocab.min(self.chorus_vocab) {
            return Err(Error::Config("bad vocabulary sizes".into()));
        }
        if self.chord_styles < 2 || self.chords_per_line == 0 {
            return Err(Error::Config("need at least 2 chord styles and 1 chord per line".into()));
        }
        if self.sample_rate < 4000 {
            return Err(Error::Config("sample rate below 4 kHz".into()));
        }
        Ok(())
    }
}

const ONSETS: [&str; 16] = [
    "b", "d", "f", "g", "h", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w", "z",
];
const NUCLEI: [&str; 8] = ["a", "e", "i", "o", "u", "ai", "ou", "ee"];
const FILLERS: [&str; 6] = ["oh", "yeah", "the", "you", "my", "and"];

/// Deterministic pseudo-word for vocabulary slot `i`.
fn word(i: usize) -> String {
    let mut s = String::new();
    let mut x = i + 1;
    while x > 0 {
        let syl = x % (ONSETS.len() * NUCLEI.len());
        s.push_str(ONSETS[syl % ONSETS.len()]);
        s.push_str(NUCLEI[syl / ONSETS.len()]);
        x /= ONSETS.len() * NUCLEI.len();
    }
    s
}

struct Vocab {
    verse: Vec<String>,
    chorus: Vec<String>,
    phrases: Vec<Vec<String>>,
}

impl Vocab {
    fn new(cfg: &SynthConfig, rng: &mut SeededRng) -> Self {
        let verse: Vec<String> = (0..cfg.verse_vocab).map(word).collect();
        let start = cfg.verse_vocab - cfg.vocab_overlap;
        let chorus: Vec<String> = (start..start + cfg.chorus_vocab).map(word).collect();
        let all: Vec<String> = (0..start + cfg.chorus_vocab).map(word).collect();
        let phrases = (0..cfg.phrases)
            .map(|_| (0..4).map(|_| all[rng.below(all.len())].clone()).collect())
            .collect();
        Self {
            verse,
            chorus,
            phrases,
        }
    }

    fn token(&self, chorus: bool, noise: f64, rng: &mut SeededRng) -> String {
        let flip = rng.bernoulli(noise);
        let pool = if chorus != flip { &self.chorus } else { &self.verse };
        pool[rng.below(pool.len())].clone()
    }

    fn line(&self, chorus: bool, noise: f64, rng: &mut SeededRng) -> Vec<String> {
        let len = 5 + rng.below(4);
        let mut toks: Vec<String> = (0..len).map(|_| self.token(chorus, noise, rng)).collect();
        if rng.bernoulli(0.5) {
            let at = rng.below(toks.len() + 1);
            toks.insert(at, String::from(FILLERS[rng.below(FILLERS.len())]));
        }
        toks
    }
}

fn insert_phrase(tokens: &mut Vec<String>, phrase: &[String], rng: &mut SeededRng) {
    let at = rng.below(tokens.len() + 1);
    for (k, w) in phrase.iter().enumerate() {
        tokens.insert(at + k, w.clone());
    }
}

fn chord_loops(cfg: &SynthConfig, rng: &mut SeededRng) -> Vec<[ChordSymbol; 4]> {
    let all: Vec<ChordSymbol> = ChordSymbol::all().collect();
    let mut seen = BTreeSet::new();
    let mut loops = Vec::new();
    while loops.len() < cfg.chord_styles {
        let l = [0; 4].map(|_| all[rng.below(all.len())]);
        if seen.insert(l) {
            loops.push(l);
        }
    }
    loops
}

fn midi_hz(m: f64) -> f64 {
    440.0 * math::powf(2.0, (m - 69.0) / 12.0)
}

/// Sum-of-sinusoids rendering of one chord with short linear fades.
fn render_chord(out: &mut [f32], chord: ChordSymbol, base_midi: f64, amp: f64, rate: u32) {
    let n = out.len();
    let fade = ((rate as usize) / 200).min(n / 2).max(1);
    let pcs = chord.pitch_classes();
    let notes = [
        base_midi + pcs[0] as f64,
        base_midi + pcs[0] as f64 + ((pcs[1] + 12 - pcs[0]) % 12) as f64,
        base_midi + pcs[0] as f64 + 7.0,
    ];
    for (i, s) in out.iter_mut().enumerate() {
        let t = i as f64 / rate as f64;
        let env = (i.min(n - 1 - i) as f64 / fade as f64).min(1.0);
        let v: f64 = notes
            .iter()
            .map(|&m| math::sin(2.0 * PI * midi_hz(m) * t))
            .sum();
        *s += (amp * env * v / 3.0) as f32;
    }
}

/// Generate a labeled corpus with chords and audio. Deterministic per seed.
pub fn synth_corpus(cfg: &SynthConfig, seed: u64) -> Result<Corpus> {
    cfg.validate()?;
    let mut rng = SeededRng::derive(seed, 0x5717);
    let vocab = Vocab::new(cfg, &mut rng);
    let loops = chord_loops(cfg, &mut rng);
    let all_chords: Vec<ChordSymbol> = ChordSymbol::all().collect();
    let width = format!("{}", cfg.songs.saturating_sub(1)).len();
    let mut songs = Vec::with_capacity(cfg.songs);
    for s in 0..cfg.songs {
        let mut rng = SeededRng::derive(seed, s as u64 + 1);
        let n_chorus = cfg.chorus_block * cfg.chorus_repeats;
        let n_verse = cfg.lines_per_song - n_chorus;

        // Verse lines before each chorus occurrence and after the last.
        let mut gaps = vec![0usize; cfg.chorus_repeats + 1];
        let n_gaps = gaps.len();
        for _ in 0..n_verse {
            gaps[rng.below(n_gaps)] += 1;
        }
        let mut layout: Vec<Option<usize>> = Vec::new();
        for (g, &count) in gaps.iter().enumerate() {
            layout.extend(core::iter::repeat_n(None, count));
            if g < cfg.chorus_repeats {
                layout.extend((0..cfg.chorus_block).map(Some));
            }
        }

        // Lyrics.
        let template: Vec<Vec<String>> = (0..cfg.chorus_block)
            .map(|_| vocab.line(true, cfg.lyric_noise, &mut rng))
            .collect();
        let hook = (rng.bernoulli(cfg.hook_prob) && !vocab.phrases.is_empty())
            .then(|| (rng.below(vocab.phrases.len()), rng.below(cfg.chorus_block)));
        let mut verses: Vec<Vec<String>> = Vec::new();
        let mut texts = Vec::with_capacity(layout.len());
        for slot in &layout {
            let tokens = match *slot {
                Some(b) => {
                    let mut t: Vec<String> = template[b]
                        .iter()
                        .map(|w| {
                            if rng.bernoulli(cfg.repeat_noise) {
                                vocab.token(true, cfg.lyric_noise, &mut rng)
                            } else {
                                w.clone()
                            }
                        })
                        .collect();
                    if let Some((p, line)) = hook {
                        if line == b {
                            let at = t.len() / 2;
                            for (k, w) in vocab.phrases[p].iter().enumerate() {
                                t.insert(at + k, w.clone());
                            }
                        }
                    }
                    t
                }
                None => {
                    let mut t = if !verses.is_empty() && rng.bernoulli(cfg.verse_repeat) {
                        verses[rng.below(verses.len())].clone()
                    } else {
                        vocab.line(false, cfg.lyric_noise, &mut rng)
                    };
                    verses.push(t.clone());
                    if !vocab.phrases.is_empty() && rng.bernoulli(cfg.verse_phrase_prob) {
                        let p = rng.below(vocab.phrases.len());
                        insert_phrase(&mut t, &vocab.phrases[p], &mut rng);
                    }
                    t
                }
            };
            texts.push(tokens.join(" "));
        }

        // Chords: chorus loops come from the first two thirds of the styles,
        // verse loops from the last two thirds.
        let third = (loops.len() / 3).max(1);
        let chorus_loop = loops[rng.below(loops.len() - third)];
        let verse_loop = loop {
            let l = loops[third + rng.below(loops.len() - third)];
            if l != chorus_loop {
                break l;
            }
        };
        let chords: Vec<ChordSequence> = layout
            .iter()
            .enumerate()
            .map(|(i, slot)| {
                let lp = if slot.is_some() { chorus_loop } else { verse_loop };
                (0..cfg.chords_per_line)
                    .map(|k| {
                        if rng.bernoulli(cfg.chord_noise) {
                            all_chords[rng.below(all_chords.len())]
                        } else {
                            lp[(i + k) % 4]
                        }
                    })
                    .collect()
            })
            .collect();

        // Timing and audio.
        let rate = cfg.sample_rate;
        let gain = rng.uniform_range(0.6, 1.4);
        let chorus_boost = rng.uniform_range(1.8, 2.4);
        let base_verse = 48.0 + rng.below(5) as f64;
        let lead_ms = 500 + 10 * rng.below(50) as u64;
        let mut lines = Vec::with_capacity(layout.len());
        let mut t = lead_ms;
        for (i, slot) in layout.iter().enumerate() {
            let dur = 900 + 10 * rng.below(51) as u64;
            lines.push(LyricLine {
                index: i,
                text: texts[i].clone(),
                start_ms: t,
                end_ms: t + dur,
                label: Some(slot.is_some()),
            });
            t += dur;
        }
        let total = (t + 300) as usize * rate as usize / 1000;
        let mut samples = vec![0.0f32; total];
        for (i, line) in lines.iter().enumerate() {
            let a = line.start_ms as usize * rate as usize / 1000;
            let b = line.end_ms as usize * rate as usize / 1000;
            let chorus = layout[i].is_some();
            let (base, amp) = if chorus {
                (base_verse + 12.0, 0.12 * gain * chorus_boost)
            } else {
                (base_verse, 0.12 * gain)
            };
            let seq = &chords[i];
            let seg = (b - a) / seq.len();
            for (k, &c) in seq.iter().enumerate() {
                let lo = a + k * seg;
                let hi = if k + 1 == seq.len() { b } else { lo + seg };
                render_chord(&mut samples[lo..hi], c, base, amp, rate);
            }
        }
        for s in samples.iter_mut() {
            *s += (0.003 * rng.normal()) as f32;
        }

        let mut song = Song::new(format!("song{:0width$}", s, width = width), lines);
        song.chords = Some(chords);
        song.audio = Some(Waveform::new(samples, rate)?);
        songs.push(song);
    }
    Ok(Corpus::new(songs))
}

/// Seeded Gaussian word vectors for every token of the corpus. Each word's
/// vector depends only on the seed and the word itself.
pub fn synth_word_vectors(corpus: &Corpus, dim: usize, seed: u64) -> Vec<(String, Vec<f64>)> {
    let words: BTreeSet<String> = corpus
        .songs
        .iter()
        .flat_map(|s| &s.lines)
        .flat_map(|l| l.tokens())
        .collect();
    let scale = 1.0 / math::sqrt(dim as f64);
    words
        .into_iter()
        .map(|w| {
            let h = w
                .bytes()
                .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3));
            let mut r = SeededRng::derive(seed, h);
            let v = (0..dim).map(|_| r.normal() * scale).collect();
            (w, v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::slice_line_audio;

    fn small() -> SynthConfig {
        SynthConfig {
            songs: 2,
            lines_per_song: 12,
            chorus_block: 4,
            chorus_repeats: 2,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn label_counts_follow_block_arithmetic() {
        let c = synth_corpus(&small(), 3).unwrap();
        assert_eq!(c.songs.len(), 2);
        for s in &c.songs {
            assert_eq!(s.lines.len(), 12);
            assert_eq!(s.chorus_count(), 8);
            assert!(s.is_labeled());
            assert_eq!(s.chords.as_ref().unwrap().len(), 12);
            for (i, l) in s.lines.iter().enumerate() {
                assert_eq!(l.index, i);
                assert!(l.start_ms < l.end_ms);
                assert!(!l.text.trim().is_empty());
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(synth_corpus(&small(), 9).unwrap(), synth_corpus(&small(), 9).unwrap());
        assert_ne!(synth_corpus(&small(), 9).unwrap(), synth_corpus(&small(), 10).unwrap());
    }

    #[test]
    fn chorus_block_must_fit() {
        let cfg = SynthConfig {
            lines_per_song: 6,
            chorus_block: 4,
            ..SynthConfig::default()
        };
        assert!(synth_corpus(&cfg, 0).is_err());
    }

    #[test]
    fn chorus_audio_is_louder() {
        let c = synth_corpus(&SynthConfig { songs: 8, ..SynthConfig::default() }, 1).unwrap();
        for s in &c.songs {
            let audio = s.audio.as_ref().unwrap();
            let mut sums = [(0.0, 0usize); 2];
            for l in &s.lines {
                let w = slice_line_audio(audio, l).unwrap();
                let slot = &mut sums[l.label.unwrap() as usize];
                slot.0 += w.samples.iter().map(|&x| (x as f64) * (x as f64)).sum::<f64>();
                slot.1 += w.samples.len();
            }
            let verse = math::sqrt(sums[0].0 / sums[0].1 as f64);
            let chorus = math::sqrt(sums[1].0 / sums[1].1 as f64);
            assert!(chorus > verse, "{}: {chorus} <= {verse}", s.id);
        }
    }

    #[test]
    fn chorus_repeats_share_text() {
        let c = synth_corpus(&SynthConfig { songs: 4, repeat_noise: 0.0, ..SynthConfig::default() }, 2).unwrap();
        for s in &c.songs {
            let chorus: Vec<&str> = s.lines.iter().filter(|l| l.label == Some(true)).map(|l| l.text.as_str()).collect();
            assert_eq!(chorus[..4], chorus[4..]);
        }
    }

    #[test]
    fn word_vectors_are_per_word() {
        let c = synth_corpus(&small(), 3).unwrap();
        let a = synth_word_vectors(&c, 300, 5);
        let b = synth_word_vectors(&c, 300, 5);
        assert_eq!(a, b);
        assert!(a.iter().all(|(_, v)| v.len() == 300));
        assert!(a.windows(2).all(|w| w[0].0 < w[1].0));
    }
}
