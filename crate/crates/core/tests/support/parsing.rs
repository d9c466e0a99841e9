//! Twenty synthetic papers with hand-written expected extraction results.

use corpusforge_core::corpus::TextBlock;
use corpusforge_core::extract::EnglishDictionary;

pub struct ParsingCase {
    pub name: &'static str,
    pub blocks: Vec<&'static str>,
    pub title: Option<&'static str>,
    pub abstract_text: Option<&'static str>,
    pub references: Vec<&'static str>,
    pub ref_titles: Vec<Option<&'static str>>,
    /// Expected English-gate outcome, when an abstract exists.
    pub english: Option<bool>,
}

impl ParsingCase {
    pub fn text_blocks(&self) -> Vec<TextBlock> {
        self.blocks
            .iter()
            .enumerate()
            .map(|(i, t)| TextBlock {
                page: 0,
                bbox: [0.0, 10.0 * i as f64, 100.0, 10.0 * i as f64 + 8.0],
                text: t.to_string(),
            })
            .collect()
    }

    pub fn full_text(&self) -> String {
        self.blocks.join(" ")
    }
}

pub fn dictionary() -> EnglishDictionary {
    EnglishDictionary::from_words([
        "the", "we", "present", "a", "new", "beam", "of", "and", "for", "is", "in", "results",
        "system", "design", "control", "this", "paper", "describes", "status", "laser", "linac",
        "first", "part", "second", "measured", "with",
    ])
    .unwrap()
}

pub fn cases() -> Vec<ParsingCase> {
    vec![
        ParsingCase {
            name: "standard layout, seven-char session code skipped",
            blocks: vec![
                "WEPAB12",
                "BEAM DIAGNOSTICS AT THE LINAC",
                "J. Doe, CERN, Geneva, Switzerland",
                "Abstract We present a new beam system. INTRODUCTION Text follows.",
                "REFERENCES [1] A. Author, “Beam loss monitors”, in Proc. IPAC’19. [2] B. Author, \"Laser heater design\", PRAB 2020.",
            ],
            title: Some("BEAM DIAGNOSTICS AT THE LINAC"),
            abstract_text: Some("We present a new beam system."),
            references: vec![
                "A. Author, “Beam loss monitors”, in Proc. IPAC’19.",
                "B. Author, \"Laser heater design\", PRAB 2020.",
            ],
            ref_titles: vec![Some("Beam loss monitors"), Some("Laser heater design")],
            english: Some(true),
        },
        ParsingCase {
            name: "no abstract keyword",
            blocks: vec!["COMMISSIONING OF THE INJECTOR", "We present results. INTRODUCTION x"],
            title: Some("COMMISSIONING OF THE INJECTOR"),
            abstract_text: None,
            references: vec![],
            ref_titles: vec![],
            english: None,
        },
        ParsingCase {
            name: "abstract without introduction",
            blocks: vec!["UNDULATOR ALIGNMENT", "Abstract The beam is measured. Conclusion"],
            title: Some("UNDULATOR ALIGNMENT"),
            abstract_text: None,
            references: vec![],
            ref_titles: vec![],
            english: None,
        },
        ParsingCase {
            name: "no uppercase block",
            blocks: vec!["Mixed Case Title Here", "Abstract The beam. INTRODUCTION y"],
            title: None,
            abstract_text: Some("The beam."),
            references: vec![],
            ref_titles: vec![],
            english: Some(true),
        },
        ParsingCase {
            name: "english ratio exactly one half",
            blocks: vec!["HALF AND HALF", "Abstract the beam foo bar INTRODUCTION"],
            title: Some("HALF AND HALF"),
            abstract_text: Some("the beam foo bar"),
            references: vec![],
            ref_titles: vec![],
            english: Some(true),
        },
        ParsingCase {
            name: "english ratio below one half",
            blocks: vec!["MOSTLY FOREIGN", "Abstract the qux foo bar INTRODUCTION"],
            title: Some("MOSTLY FOREIGN"),
            abstract_text: Some("the qux foo bar"),
            references: vec![],
            ref_titles: vec![],
            english: Some(false),
        },
        ParsingCase {
            name: "last reference heading wins",
            blocks: vec![
                "CRYOGENIC PLANT UPGRADE",
                "Abstract This paper describes the status. INTRODUCTION See REFERENCES below.",
                "REFERENCES [1] X. Y., “Cold box”. [2] Y. Z., no quotes here.",
            ],
            title: Some("CRYOGENIC PLANT UPGRADE"),
            abstract_text: Some("This paper describes the status."),
            references: vec!["X. Y., “Cold box”.", "Y. Z., no quotes here."],
            ref_titles: vec![Some("Cold box"), None],
            english: Some(true),
        },
        ParsingCase {
            name: "reference section without markers",
            blocks: vec!["TIMING SYSTEM REVIEW", "Abstract We present the control system. INTRODUCTION", "REFERENCES none listed"],
            title: Some("TIMING SYSTEM REVIEW"),
            abstract_text: Some("We present the control system."),
            references: vec![],
            ref_titles: vec![],
            english: Some(true),
        },
        ParsingCase {
            name: "comma inside closing quote",
            blocks: vec![
                "FAST KICKER PROTOTYPE",
                "Abstract We present a new design. INTRODUCTION",
                "REFERENCES [1] A. B., \"Design of a kicker,” PRAB 21 (2018).",
            ],
            title: Some("FAST KICKER PROTOTYPE"),
            abstract_text: Some("We present a new design."),
            references: vec!["A. B., \"Design of a kicker,” PRAB 21 (2018)."],
            ref_titles: vec![Some("Design of a kicker")],
            english: Some(true),
        },
        ParsingCase {
            name: "empty quotes",
            blocks: vec![
                "VACUUM CONDITIONING",
                "Abstract We present results. INTRODUCTION",
                "REFERENCES [1] A. B., \"\" unpublished.",
            ],
            title: Some("VACUUM CONDITIONING"),
            abstract_text: Some("We present results."),
            references: vec!["A. B., \"\" unpublished."],
            ref_titles: vec![None],
            english: Some(true),
        },
        ParsingCase {
            name: "abstract across blocks",
            blocks: vec!["SPLIT ABSTRACT CASE", "Abstract First part.", "Second part. INTRODUCTION z"],
            title: Some("SPLIT ABSTRACT CASE"),
            abstract_text: Some("First part. Second part."),
            references: vec![],
            ref_titles: vec![],
            english: Some(true),
        },
        ParsingCase {
            name: "title with digits and punctuation",
            blocks: vec!["RF-GUN 2.0 TESTS", "Abstract The laser system. INTRODUCTION"],
            title: Some("RF-GUN 2.0 TESTS"),
            abstract_text: Some("The laser system."),
            references: vec![],
            ref_titles: vec![],
            english: Some(true),
        },
        ParsingCase {
            name: "title of exactly eight characters",
            blocks: vec!["XFEL RUN", "Abstract Beam results. INTRODUCTION"],
            title: Some("XFEL RUN"),
            abstract_text: Some("Beam results."),
            references: vec![],
            ref_titles: vec![],
            english: Some(true),
        },
        ParsingCase {
            name: "first abstract span wins",
            blocks: vec!["TWO ABSTRACTS HERE", "Abstract Alpha. INTRODUCTION one", "Abstract Beta. INTRODUCTION two"],
            title: Some("TWO ABSTRACTS HERE"),
            abstract_text: Some("Alpha."),
            references: vec![],
            ref_titles: vec![],
            english: Some(false),
        },
        ParsingCase {
            name: "lowercase abstract keyword ignored",
            blocks: vec!["CASE SENSITIVITY", "abstract the beam INTRODUCTION"],
            title: Some("CASE SENSITIVITY"),
            abstract_text: None,
            references: vec![],
            ref_titles: vec![],
            english: None,
        },
        ParsingCase {
            name: "two-digit reference numbers",
            blocks: vec![
                "LONG REFERENCE LIST",
                "Abstract We present the linac. INTRODUCTION",
                "REFERENCES [10] P. Q., “Ten”. [11] R. S., “Eleven”, 2019.",
            ],
            title: Some("LONG REFERENCE LIST"),
            abstract_text: Some("We present the linac."),
            references: vec!["P. Q., “Ten”.", "R. S., “Eleven”, 2019."],
            ref_titles: vec![Some("Ten"), Some("Eleven")],
            english: Some(true),
        },
        ParsingCase {
            name: "heading text before first marker dropped",
            blocks: vec![
                "HEADING NOISE TEST",
                "Abstract A new laser. INTRODUCTION",
                "REFERENCES AND NOTES [1] T. U., “Only one”.",
            ],
            title: Some("HEADING NOISE TEST"),
            abstract_text: Some("A new laser."),
            references: vec!["T. U., “Only one”."],
            ref_titles: vec![Some("Only one")],
            english: Some(true),
        },
        ParsingCase {
            name: "mixed quote styles",
            blocks: vec![
                "QUOTE STYLE MIXING",
                "Abstract The status of the linac. INTRODUCTION",
                "REFERENCES [1] V. W., “Mixed quotes\" 2021.",
            ],
            title: Some("QUOTE STYLE MIXING"),
            abstract_text: Some("The status of the linac."),
            references: vec!["V. W., “Mixed quotes\" 2021."],
            ref_titles: vec![Some("Mixed quotes")],
            english: Some(true),
        },
        ParsingCase {
            name: "empty abstract",
            blocks: vec!["EMPTY ABSTRACT PAPER", "Abstract INTRODUCTION body"],
            title: Some("EMPTY ABSTRACT PAPER"),
            abstract_text: Some(""),
            references: vec![],
            ref_titles: vec![],
            english: Some(false),
        },
        ParsingCase {
            name: "non-english abstract",
            blocks: vec!["STRAHLDIAGNOSE AM LINAC", "Abstract Der Strahl wird gemessen. INTRODUCTION"],
            title: Some("STRAHLDIAGNOSE AM LINAC"),
            abstract_text: Some("Der Strahl wird gemessen."),
            references: vec![],
            ref_titles: vec![],
            english: Some(false),
        },
    ]
}
