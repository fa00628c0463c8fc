use std::path::Path;

use chorus::dataset::{load_corpus, write_corpus, CorpusSource};
use chorus::formats::{hgat, mfcc, ngx, tsv, vectors};
use chorus::wav;
use chorus_core::corpus::{synth_corpus, SynthConfig};
use chorus_core::dsp::Waveform;
use chorus_core::hgat::{GatConfig, GatParams};
use chorus_core::mmcr::{evaluate, Prediction};
use chorus_core::songsearch::{build_index, query_chorus, NGramIndex, SearchQuery};
use proptest::prelude::*;

fn small_corpus(songs: usize, seed: u64) -> chorus_core::corpus::Corpus {
    synth_corpus(
        &SynthConfig {
            songs,
            ..SynthConfig::default()
        },
        seed,
    )
    .unwrap()
}

proptest! {
    #[test]
    fn vectors_round_trip_bit_exact(rows in prop::collection::vec(prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 3), 0..20)) {
        let keyed: Vec<(String, Vec<f64>)> = rows.into_iter().enumerate().map(|(i, v)| (format!("k{i}"), v)).collect();
        let text = vectors::render(3, keyed.iter().map(|(k, v)| (k.as_str(), v.as_slice()))).unwrap();
        let (dim, back) = vectors::parse(&text, Path::new("mem")).unwrap();
        prop_assert_eq!(dim, 3);
        prop_assert_eq!(back, keyed);
    }

    #[test]
    fn mfcc_round_trip(rows in 0usize..6, data in prop::collection::vec(-1e3f32..1e3, 78)) {
        let data = &data[..rows * 13];
        let bytes = mfcc::encode(rows, 13, data);
        prop_assert_eq!(mfcc::decode(&bytes, Path::new("mem")).unwrap(), (rows, 13, data.to_vec()));
    }
}

#[test]
fn vectors_reject_bad_rows() {
    assert!(vectors::render(2, [("a b", &[1.0, 2.0][..])]).is_err());
    assert!(vectors::render(2, [("a", &[1.0][..])]).is_err());
    assert!(vectors::parse("1 2\na 1.0\n", Path::new("mem")).is_err());
    assert!(vectors::parse("", Path::new("mem")).is_err());
}

#[test]
fn mfcc_rejects_truncation() {
    let bytes = mfcc::encode(2, 13, &[0.5; 26]);
    assert!(mfcc::decode(&bytes[..bytes.len() - 1], Path::new("mem")).is_err());
}

#[test]
fn hgat_round_trip_after_f32_rounding() {
    let p = GatParams::init(GatConfig::new(10), 7).unwrap();
    let r = hgat::round_to_f32(&p);
    let back = hgat::decode(&hgat::encode(&p), Path::new("mem")).unwrap();
    assert_eq!(back, r);
    assert_eq!(back.config().hidden, p.config().hidden);
    assert_eq!(hgat::round_to_f32(&back), back);
    assert!(hgat::decode(b"HGAT0", Path::new("mem")).is_err());
}

#[test]
fn ngx_round_trip_preserves_queries() {
    let c = small_corpus(12, 4);
    let preds: Vec<Prediction> = c
        .songs
        .iter()
        .flat_map(|s| {
            s.lines.iter().map(move |l| Prediction {
                song_id: s.id.clone(),
                line: l.index,
                probability: (l.index % 5) as f64 / 4.0,
                label: l.index % 5 == 4,
            })
        })
        .collect();
    let idx = build_index(&c, &preds).unwrap();
    let back = ngx::decode(&ngx::encode(&idx), Path::new("mem")).unwrap();
    assert_eq!(back, idx);
    let gram = idx.postings().keys().next().unwrap().clone();
    assert_eq!(query_chorus(&back, &gram, 5).unwrap(), query_chorus(&idx, &gram, 5).unwrap());

    let empty = NGramIndex::merge(vec![]).unwrap();
    assert_eq!(ngx::decode(&ngx::encode(&empty), Path::new("mem")).unwrap(), empty);
}

#[test]
fn predictions_and_queries_round_trip() {
    let preds = vec![
        Prediction {
            song_id: "a".into(),
            line: 0,
            probability: 0.25,
            label: false,
        },
        Prediction {
            song_id: "a".into(),
            line: 1,
            probability: 0.875,
            label: true,
        },
    ];
    let text = tsv::render_predictions(&preds);
    assert_eq!(tsv::parse_predictions(&text, Path::new("mem")).unwrap(), preds);
    assert!(tsv::parse_predictions("song\tline\tprob\tlabel\na\tx\t0.1\t0\n", Path::new("mem")).is_err());

    let qs = vec![
        SearchQuery {
            keyword: "la la la".into(),
            target: "a".into(),
        },
        SearchQuery {
            keyword: "oh my dear love".into(),
            target: "b".into(),
        },
    ];
    assert_eq!(tsv::parse_queries(&tsv::render_queries(&qs), Path::new("mem")).unwrap(), qs);
}

#[test]
fn metrics_table_has_one_row_per_system() {
    let m = evaluate(&[true, true, false, false], &[true, false, true, false]).unwrap();
    let t = tsv::metrics_table(&[("MMCR".into(), m), ("TextRank".into(), m)]);
    assert_eq!(t.lines().count(), 3);
    assert!(t.lines().nth(1).unwrap().starts_with("MMCR"));
    let row = tsv::metrics_row("MMCR", &m);
    assert_eq!(row.split('\t').count(), tsv::METRICS_HEADER.split('\t').count());
    assert_eq!(row, "MMCR\t0.500000\t0.500000\t0.500000\t0.500000\t1\t1\t1\t1");
}

#[test]
fn wav_float_round_trip_and_int16_scaling() {
    let dir = tempfile::tempdir().unwrap();
    let w = Waveform::new(vec![0.0, 0.5, -0.25, 1.0], 16_000).unwrap();
    let p = dir.path().join("x/f.wav");
    wav::write(&p, &w).unwrap();
    assert_eq!(wav::read(&p).unwrap(), w);

    let p16 = dir.path().join("i.wav");
    let spec = hound::WavSpec {
        channels: 2,
        sample_rate: 8000,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut wr = hound::WavWriter::create(&p16, spec).unwrap();
    for s in [16384i16, 0, -32768, -32768] {
        wr.write_sample(s).unwrap();
    }
    wr.finalize().unwrap();
    let r = wav::read(&p16).unwrap();
    assert_eq!(r.sample_rate, 8000);
    assert_eq!(r.samples, vec![0.25, -1.0]);
}

#[test]
fn corpus_directory_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let c = small_corpus(5, 9);
    let words = vec![("la".to_string(), vec![0.5, -1.0])];
    write_corpus(dir.path(), &c, Some((2, &words))).unwrap();
    let mut src = CorpusSource::new(dir.path());
    src.load_audio = true;
    let back = load_corpus(&src).unwrap();
    assert_eq!(back.songs.len(), c.songs.len());
    for (a, b) in back.songs.iter().zip(&c.songs) {
        assert_eq!(a.id, b.id);
        for (x, y) in a.lines.iter().zip(&b.lines) {
            assert_eq!(x, y, "song {}", a.id);
        }
        assert_eq!(a.lines.len(), b.lines.len());
        assert_eq!(a.chords, b.chords);
        assert_eq!(a.audio, b.audio);
    }
    assert_eq!(vectors::read(&src.words_path()).unwrap(), (2, words));
}

#[test]
fn missing_lyrics_dir_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    assert!(load_corpus(&CorpusSource::new(dir.path())).is_err());
}
