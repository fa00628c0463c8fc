use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

const NAMES: [&str; 12] = [
    "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChordQuality {
    Major,
    Minor,
}

/// Triad chord: root pitch class (C = 0) and quality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChordSymbol {
    pub root: u8,
    pub quality: ChordQuality,
}

pub type ChordSequence = Vec<ChordSymbol>;

impl ChordSymbol {
    pub fn new(root: u8, quality: ChordQuality) -> Self {
        Self {
            root: root % 12,
            quality,
        }
    }

    pub fn major(root: u8) -> Self {
        Self::new(root, ChordQuality::Major)
    }

    pub fn minor(root: u8) -> Self {
        Self::new(root, ChordQuality::Minor)
    }

    /// Pitch classes of the root-position triad.
    pub fn pitch_classes(self) -> [u8; 3] {
        let third = match self.quality {
            ChordQuality::Major => 4,
            ChordQuality::Minor => 3,
        };
        [self.root, (self.root + third) % 12, (self.root + 7) % 12]
    }

    pub fn transpose(self, semitones: i32) -> Self {
        Self::new((self.root as i32 + semitones).rem_euclid(12) as u8, self.quality)
    }

    /// All 24 triads: the 12 majors then the 12 minors.
    pub fn all() -> impl Iterator<Item = ChordSymbol> {
        (0..12)
            .map(ChordSymbol::major)
            .chain((0..12).map(ChordSymbol::minor))
    }

    pub fn name(self) -> String {
        let mut s = String::from(NAMES[self.root as usize]);
        if self.quality == ChordQuality::Minor {
            s.push('m');
        }
        s
    }
}

impl fmt::Display for ChordSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseChordError;

impl fmt::Display for ParseChordError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("invalid chord symbol")
    }
}

impl FromStr for ChordSymbol {
    type Err = ParseChordError;

    /// Accepts `C`, `C#`, `Db`, `Am`, `Amin`, `Cmaj`, and reduces sevenths
    /// and other extensions to their triad (`G7` -> `G`, `Am7` -> `Am`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.chars();
        let letter = chars.next().ok_or(ParseChordError)?;
        let mut root: i32 = match letter {
            'C' => 0,
            'D' => 2,
            'E' => 4,
            'F' => 5,
            'G' => 7,
            'A' => 9,
            'B' => 11,
            _ => return Err(ParseChordError),
        };
        let mut rest = chars.as_str();
        if let Some(r) = rest.strip_prefix('#') {
            root += 1;
            rest = r;
        } else if let Some(r) = rest.strip_prefix('b') {
            root -= 1;
            rest = r;
        }
        // Slash chords keep their upper structure.
        let rest = rest.split('/').next().unwrap_or("");
        let quality = if rest.starts_with("maj") {
            ChordQuality::Major
        } else if rest.starts_with("min") || (rest.starts_with('m') && !rest.starts_with("maj")) {
            ChordQuality::Minor
        } else if rest.is_empty()
            || rest
                .chars()
                .next()
                .is_some_and(|c| c.is_ascii_digit() || matches!(c, 'a' | 's' | 'd' | '+' | '('))
        {
            ChordQuality::Major
        } else {
            return Err(ParseChordError);
        };
        Ok(ChordSymbol::new(root.rem_euclid(12) as u8, quality))
    }
}
