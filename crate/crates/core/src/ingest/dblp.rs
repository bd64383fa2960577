//! Streaming reader for DBLP-style XML dumps.
//!
//! The root element's children are publication records (`<article>`,
//! `<inproceedings>`, ...). Each record's `<author>` children become one
//! [`PublicationRecord`] apiece. The reader holds one record in memory at a
//! time, so memory use does not grow with the file.

use std::collections::{HashMap, VecDeque};
use std::io::BufRead;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use serde::{Deserialize, Serialize};

use super::{IngestError, PublicationRecord, VenueType};

/// Element and attribute names used by the reader. Defaults follow the
/// public DBLP DTD.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestConfig {
    pub journal_elements: Vec<String>,
    pub conference_elements: Vec<String>,
    /// Record kinds that are not publications (DBLP person pages).
    pub ignored_elements: Vec<String>,
    pub author_element: String,
    /// Children holding the venue name; the first one present wins.
    pub venue_elements: Vec<String>,
    pub year_element: String,
    pub informal_attribute: String,
    pub informal_values: Vec<String>,
    pub min_year: i32,
    pub max_year: i32,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            journal_elements: vec!["article".into()],
            conference_elements: vec!["inproceedings".into()],
            ignored_elements: vec!["www".into()],
            author_element: "author".into(),
            venue_elements: vec!["journal".into(), "booktitle".into()],
            year_element: "year".into(),
            informal_attribute: "publtype".into(),
            informal_values: vec!["informal".into(), "informal publication".into()],
            min_year: 1900,
            max_year: current_year() + 1,
        }
    }
}

fn current_year() -> i32 {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    // mean Gregorian year
    1970 + (secs / 31_556_952) as i32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    MissingVenue,
    MissingYear,
    InvalidYear,
    MissingAuthor,
}

/// One line of the skip report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedRecord {
    pub reason: SkipReason,
    pub byte_offset: u64,
    pub element: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Author,
    Venue,
    Year,
}

#[derive(Debug)]
struct PendingPub {
    element: String,
    key: Option<String>,
    offset: u64,
    informal: bool,
    authors: Vec<String>,
    venue: Option<String>,
    year: Option<String>,
}

/// Iterator over the publication records of one XML source.
///
/// Yields `Err` at most once, for malformed XML, and then stops. Records
/// lacking a venue, year, or author are skipped and listed in
/// [`DblpReader::skipped`].
pub struct DblpReader<R: BufRead> {
    xml: Reader<R>,
    cfg: IngestConfig,
    buf: Vec<u8>,
    depth: usize,
    current: Option<PendingPub>,
    reading: Option<(Field, usize)>,
    text: String,
    ready: VecDeque<PublicationRecord>,
    skipped: Vec<SkippedRecord>,
    seq_by_scholar: HashMap<String, usize>,
    done: bool,
}

/// Starts a single forward pass over `source`.
pub fn parse_dblp_stream<R: BufRead>(source: R, cfg: IngestConfig) -> DblpReader<R> {
    let mut xml = Reader::from_reader(source);
    xml.config_mut().trim_text(false);
    xml.config_mut().check_end_names = true;
    DblpReader {
        xml,
        cfg,
        buf: Vec::with_capacity(4096),
        depth: 0,
        current: None,
        reading: None,
        text: String::new(),
        ready: VecDeque::new(),
        skipped: Vec::new(),
        seq_by_scholar: HashMap::new(),
        done: false,
    }
}

impl<R: BufRead> DblpReader<R> {
    pub fn skipped(&self) -> &[SkippedRecord] {
        &self.skipped
    }

    pub fn into_skipped(self) -> Vec<SkippedRecord> {
        self.skipped
    }

    fn venue_type(&self, element: &str) -> VenueType {
        if self.cfg.journal_elements.iter().any(|e| e == element) {
            VenueType::Journal
        } else if self.cfg.conference_elements.iter().any(|e| e == element) {
            VenueType::Conference
        } else {
            VenueType::Other
        }
    }

    fn open_publication(&self, start: &BytesStart<'_>, offset: u64) -> Option<PendingPub> {
        let element = String::from_utf8_lossy(start.name().as_ref()).into_owned();
        if self.cfg.ignored_elements.contains(&element) {
            return None;
        }
        let mut key = None;
        let mut informal = false;
        for attr in start.attributes().flatten() {
            let name = attr.key.as_ref();
            let value = unescape(&attr.value);
            if name == b"key" {
                key = Some(value);
            } else if name == self.cfg.informal_attribute.as_bytes()
                && self.cfg.informal_values.contains(&value)
            {
                informal = true;
            }
        }
        Some(PendingPub {
            element,
            key,
            offset,
            informal,
            authors: Vec::new(),
            venue: None,
            year: None,
        })
    }

    fn field_for(&self, name: &[u8]) -> Option<Field> {
        if name == self.cfg.author_element.as_bytes() {
            Some(Field::Author)
        } else if name == self.cfg.year_element.as_bytes() {
            Some(Field::Year)
        } else if self.cfg.venue_elements.iter().any(|v| v.as_bytes() == name) {
            Some(Field::Venue)
        } else {
            None
        }
    }

    fn close_field(&mut self, field: Field) {
        let value = self.text.trim().to_string();
        self.text.clear();
        let Some(publ) = self.current.as_mut() else {
            return;
        };
        if value.is_empty() {
            return;
        }
        match field {
            Field::Author => publ.authors.push(value),
            Field::Venue if publ.venue.is_none() => publ.venue = Some(value),
            Field::Year if publ.year.is_none() => publ.year = Some(value),
            _ => {}
        }
    }

    fn close_publication(&mut self) {
        let Some(publ) = self.current.take() else {
            return;
        };
        let skip = |reason| SkippedRecord {
            reason,
            byte_offset: publ.offset,
            element: publ.element.clone(),
            key: publ.key.clone(),
        };
        let Some(venue) = publ.venue.clone() else {
            self.skipped.push(skip(SkipReason::MissingVenue));
            return;
        };
        let Some(year_text) = publ.year.as_deref() else {
            self.skipped.push(skip(SkipReason::MissingYear));
            return;
        };
        let year = match year_text.parse::<i32>() {
            Ok(y) if (self.cfg.min_year..=self.cfg.max_year).contains(&y) => y,
            _ => {
                self.skipped.push(skip(SkipReason::InvalidYear));
                return;
            }
        };
        if publ.authors.is_empty() {
            self.skipped.push(skip(SkipReason::MissingAuthor));
            return;
        }
        let venue_type = self.venue_type(&publ.element);
        for (i, author) in publ.authors.into_iter().enumerate() {
            let seq = self.seq_by_scholar.entry(author.clone()).or_insert(0);
            self.ready.push_back(PublicationRecord {
                scholar_id: author,
                venue_id: venue.clone(),
                year,
                seq: *seq,
                venue_type,
                informal: publ.informal,
                first_author: i == 0,
            });
            *seq += 1;
        }
    }

    fn xml_error(&mut self, message: String) -> IngestError {
        self.done = true;
        IngestError::Xml {
            offset: self.xml.error_position(),
            message,
        }
    }

    /// Advances the parser until at least one record is ready or input ends.
    fn pump(&mut self) -> Result<(), IngestError> {
        while self.ready.is_empty() && !self.done {
            let offset = self.xml.buffer_position();
            self.buf.clear();
            let event = match self.xml.read_event_into(&mut self.buf) {
                Ok(ev) => ev.into_owned(),
                Err(e) => return Err(self.xml_error(e.to_string())),
            };
            match event {
                Event::Start(start) => {
                    self.depth += 1;
                    match self.depth {
                        2 => self.current = self.open_publication(&start, offset),
                        3 if self.current.is_some() => {
                            if let Some(field) = self.field_for(start.name().as_ref()) {
                                self.reading = Some((field, 3));
                                self.text.clear();
                            }
                        }
                        _ => {}
                    }
                }
                Event::Empty(start) => {
                    if self.depth == 1 {
                        // self-closing record: no children, so it is skipped
                        self.current = self.open_publication(&start, offset);
                        self.close_publication();
                    }
                }
                Event::End(_) => {
                    if let Some((field, depth)) = self.reading {
                        if depth == self.depth {
                            self.reading = None;
                            self.close_field(field);
                        }
                    }
                    if self.depth == 2 {
                        self.close_publication();
                    }
                    self.depth = self.depth.saturating_sub(1);
                }
                Event::Text(text) => {
                    if self.reading.is_some() {
                        self.text.push_str(&unescape(&text));
                    }
                }
                Event::CData(data) => {
                    if self.reading.is_some() {
                        self.text.push_str(&String::from_utf8_lossy(&data));
                    }
                }
                Event::Eof => {
                    self.done = true;
                    if self.depth != 0 {
                        return Err(IngestError::Xml {
                            offset: self.xml.buffer_position(),
                            message: format!(
                                "unexpected end of input with {} open element(s)",
                                self.depth
                            ),
                        });
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

impl<R: BufRead> Iterator for DblpReader<R> {
    type Item = Result<PublicationRecord, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.ready.is_empty() {
            if let Err(e) = self.pump() {
                self.ready.clear();
                return Some(Err(e));
            }
        }
        self.ready.pop_front().map(Ok)
    }
}

/// Resolves the predefined XML entities and numeric character references.
/// Named entities declared in an external DTD (DBLP uses `&uuml;` and
/// friends) are kept verbatim, which keeps identifiers stable.
fn unescape(raw: &[u8]) -> String {
    let s = String::from_utf8_lossy(raw);
    if !s.contains('&') {
        return s.into_owned();
    }
    let mut out = String::with_capacity(s.len());
    let mut rest = &*s;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        let after = &rest[amp..];
        let Some(semi) = after.find(';').filter(|&i| i <= 12) else {
            out.push('&');
            rest = &after[1..];
            continue;
        };
        let name = &after[1..semi];
        let resolved = match name {
            "lt" => Some('<'),
            "gt" => Some('>'),
            "amp" => Some('&'),
            "quot" => Some('"'),
            "apos" => Some('\''),
            _ => name
                .strip_prefix("#x")
                .and_then(|h| u32::from_str_radix(h, 16).ok())
                .or_else(|| name.strip_prefix('#').and_then(|d| d.parse().ok()))
                .and_then(char::from_u32),
        };
        match resolved {
            Some(c) => out.push(c),
            None => out.push_str(&after[..=semi]),
        }
        rest = &after[semi + 1..];
    }
    out.push_str(rest);
    out
}
