//! LRC lyric files: `[mm:ss.xx]text` lines with optional `[ti:...]` style
//! metadata tags.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use super::LyricLine;
use crate::{math, Error, Result};

/// Fallback duration of the final line when the song has no other closed span.
const DEFAULT_LAST_LINE_MS: u64 = 4000;

enum Tag {
    Time(u64),
    Meta,
}

fn parse_time_tag(body: &str) -> Option<u64> {
    let (min, rest) = body.split_once(':')?;
    let (sec, frac) = rest.split_once('.')?;
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if !digits(min) || sec.len() != 2 || !digits(sec) || !digits(frac) {
        return None;
    }
    if frac.len() != 2 && frac.len() != 3 {
        return None;
    }
    let min: u64 = min.parse().ok()?;
    let sec: u64 = sec.parse().ok()?;
    if sec >= 60 {
        return None;
    }
    let frac_ms: u64 = if frac.len() == 2 {
        frac.parse::<u64>().ok()? * 10
    } else {
        frac.parse().ok()?
    };
    Some(min * 60_000 + sec * 1000 + frac_ms)
}

fn classify_tag(body: &str) -> Option<Tag> {
    if let Some((key, _)) = body.split_once(':') {
        if !key.is_empty() && key.chars().all(|c| c.is_alphabetic()) {
            return Some(Tag::Meta);
        }
    }
    parse_time_tag(body).map(Tag::Time)
}

/// Parse LRC text into timed lyric lines.
///
/// A line's end is the next distinct start time (timestamp-only lines count
/// as end markers); the last line lasts the median duration of the others.
pub fn parse_lrc(raw: &str) -> Result<Vec<LyricLine>> {
    // (start, text or None for a bare end marker, order of appearance)
    let mut entries: Vec<(u64, Option<String>, usize)> = Vec::new();
    for (lineno, line) in raw.split('\n').enumerate() {
        let line = line.trim_end_matches('\r').trim_start_matches('\u{feff}');
        let mut rest = line.trim_start();
        let mut times = Vec::new();
        let mut is_meta = false;
        while let Some(stripped) = rest.strip_prefix('[') {
            let close = stripped.find(']').ok_or_else(|| Error::Parse {
                line: lineno + 1,
                message: "unterminated tag".to_string(),
            })?;
            let body = &stripped[..close];
            match classify_tag(body) {
                Some(Tag::Time(ms)) => times.push(ms),
                Some(Tag::Meta) => is_meta = true,
                None => {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        message: format!("malformed tag `[{body}]`"),
                    })
                }
            }
            rest = &stripped[close + 1..];
        }
        if is_meta || times.is_empty() {
            continue;
        }
        let text = rest.trim();
        for t in times {
            let order = entries.len();
            let body = (!text.is_empty()).then(|| text.to_string());
            entries.push((t, body, order));
        }
    }
    entries.sort_by_key(|e| (e.0, e.2));

    let mut lines: Vec<LyricLine> = Vec::new();
    let mut open: Vec<usize> = Vec::new();
    for (pos, (start, text, _)) in entries.iter().enumerate() {
        let Some(text) = text else { continue };
        let next = entries[pos + 1..]
            .iter()
            .map(|e| e.0)
            .find(|&t| t > *start);
        if next.is_none() {
            open.push(lines.len());
        }
        lines.push(LyricLine {
            index: lines.len(),
            text: text.clone(),
            start_ms: *start,
            end_ms: next.unwrap_or(*start),
            label: None,
        });
    }
    if lines.is_empty() {
        return Err(Error::EmptySong);
    }
    let closed: Vec<f64> = lines
        .iter()
        .filter(|l| l.end_ms > l.start_ms)
        .map(|l| (l.end_ms - l.start_ms) as f64)
        .collect();
    let tail = math::median(&closed)
        .map(|m| math::round(m) as u64)
        .unwrap_or(DEFAULT_LAST_LINE_MS)
        .max(1);
    for i in open {
        lines[i].end_ms = lines[i].start_ms + tail;
    }
    Ok(lines)
}

/// Render lines back to LRC; centisecond tags when exact, milliseconds
/// otherwise. A bare end marker follows any line whose end is not the next
/// line's start, so gaps and the last line's span survive a reparse.
pub fn serialize_lrc(lines: &[LyricLine]) -> String {
    let mut out = String::new();
    for (i, l) in lines.iter().enumerate() {
        let _ = writeln!(out, "{}{}", time_tag(l.start_ms), l.text);
        let closed_by_next = lines.get(i + 1).is_some_and(|n| n.start_ms <= l.end_ms);
        if l.end_ms > l.start_ms && !closed_by_next {
            let _ = writeln!(out, "{}", time_tag(l.end_ms));
        }
    }
    out
}

fn time_tag(t: u64) -> String {
    let (min, sec, ms) = (t / 60_000, (t / 1000) % 60, t % 1000);
    if ms % 10 == 0 {
        format!("[{min:02}:{sec:02}.{:02}]", ms / 10)
    } else {
        format!("[{min:02}:{sec:02}.{ms:03}]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_tag() {
        let lines = parse_lrc("[00:12.34]hello world").unwrap();
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].start_ms, 12_340);
        assert_eq!(lines[0].text, "hello world");
        assert_eq!(lines[0].end_ms, 12_340 + DEFAULT_LAST_LINE_MS);
    }

    #[test]
    fn end_is_next_start() {
        let lines = parse_lrc("[00:01.00]a\n[00:02.00]b").unwrap();
        assert_eq!(lines[0].end_ms, 2000);
        // last line takes the median of the closed spans
        assert_eq!(lines[1].end_ms, 3000);
    }

    #[test]
    fn malformed_tag_reports_line() {
        assert_eq!(
            parse_lrc("[0x:01.00]a"),
            Err(Error::Parse {
                line: 1,
                message: "malformed tag `[0x:01.00]`".into()
            })
        );
        let err = parse_lrc("[00:01.00]a\n[00:61.00]b").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn metadata_is_skipped_and_three_digit_fractions_parse() {
        let raw = "[ti:Song]\n[ar:Someone]\n[offset:+0]\n[01:02.345]x\n[01:03.5]y";
        assert!(parse_lrc(raw).is_err());
        let raw = "[ti:Song]\n[ar:Someone]\n[01:02.345]x\n[01:03.500]y\n";
        let lines = parse_lrc(raw).unwrap();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].start_ms, 62_345);
        assert_eq!(lines[0].end_ms, 63_500);
    }

    #[test]
    fn repeated_tags_yield_one_line_each() {
        let raw = "[00:01.00][00:05.00]chorus\n[00:03.00]verse\n[00:07.00]end";
        let lines = parse_lrc(raw).unwrap();
        let texts: Vec<&str> = lines.iter().map(|l| l.text.as_str()).collect();
        assert_eq!(texts, ["chorus", "verse", "chorus", "end"]);
        assert_eq!(lines.iter().map(|l| l.index).collect::<Vec<_>>(), [0, 1, 2, 3]);
        assert_eq!(lines[2].end_ms, 7000);
    }

    #[test]
    fn bare_timestamp_closes_previous_line() {
        let lines = parse_lrc("[00:01.00]a\n[00:01.50]\n[00:04.00]b").unwrap();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].end_ms, 1500);
        assert_eq!(lines[1].index, 1);
    }

    #[test]
    fn no_lines_is_empty_song() {
        assert_eq!(parse_lrc("[ti:x]\n\n"), Err(Error::EmptySong));
        assert_eq!(parse_lrc(""), Err(Error::EmptySong));
    }

    proptest! {
        #[test]
        fn serialize_then_parse_preserves_text_and_starts(
            steps in proptest::collection::vec(1u64..20_000, 1..30),
            words in proptest::collection::vec("[a-z]{1,8}( [a-z]{1,8}){0,4}", 30),
        ) {
            let mut t = 0;
            let lines: Vec<LyricLine> = steps.iter().enumerate().map(|(i, s)| {
                t += s;
                LyricLine { index: i, text: words[i].clone(), start_ms: t, end_ms: t + 1, label: None }
            }).collect();
            let parsed = parse_lrc(&serialize_lrc(&lines)).unwrap();
            prop_assert_eq!(parsed.len(), lines.len());
            for (a, b) in parsed.iter().zip(&lines) {
                prop_assert_eq!(&a.text, &b.text);
                prop_assert_eq!(a.start_ms, b.start_ms);
                prop_assert!(a.start_ms < a.end_ms);
            }
        }

        #[test]
        fn spans_with_gaps_round_trip(
            spans in proptest::collection::vec((0u64..3_000, 1u64..5_000), 1..20),
        ) {
            let mut t = 0;
            let lines: Vec<LyricLine> = spans.iter().enumerate().map(|(i, (gap, len))| {
                let start = t + gap;
                t = start + len;
                LyricLine { index: i, text: alloc::format!("w{i}"), start_ms: start, end_ms: t, label: None }
            }).collect();
            prop_assert_eq!(parse_lrc(&serialize_lrc(&lines)).unwrap(), lines);
        }
    }
}
