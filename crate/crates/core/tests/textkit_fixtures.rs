use clickbait::textkit::{count_syllables, pos_tag, tokenize, Lexicon, PosClass};

fn fixture(name: &str) -> String {
    let path = format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap()
}

fn data_lines(content: &str) -> impl Iterator<Item = &str> {
    content
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

#[test]
fn syllable_heuristic_against_hand_counts() {
    let content = fixture("syllables.tsv");
    let mut total = 0;
    let mut exact = 0;
    let mut misses = Vec::new();
    for line in data_lines(&content) {
        let (word, count) = line.split_once('\t').unwrap();
        let expected: usize = count.parse().unwrap();
        let got = count_syllables(word);
        assert!(got >= 1);
        total += 1;
        if got == expected {
            exact += 1;
        } else {
            misses.push(format!("{word}: {got} vs {expected}"));
        }
    }
    assert_eq!(total, 200);
    let accuracy = exact as f64 / total as f64;
    println!("syllable accuracy {accuracy:.3}; misses: {misses:?}");
    assert!(accuracy >= 0.90, "accuracy {accuracy}: {misses:?}");
}

fn parse_tag(tag: &str) -> PosClass {
    match tag {
        "N" => PosClass::Noun,
        "ADJ" => PosClass::Adjective,
        "PREP" => PosClass::Preposition,
        "ART" => PosClass::Article,
        "PRON" => PosClass::Pronoun,
        "V" => PosClass::Verb,
        "ADV" => PosClass::Adverb,
        "INTJ" => PosClass::Interjection,
        "O" => PosClass::Other,
        other => panic!("unknown tag {other}"),
    }
}

#[test]
fn tagger_accuracy_on_hand_tagged_headlines() {
    let content = fixture("pos_tagged.txt");
    let lexicon = Lexicon::embedded();
    let mut total = 0;
    let mut correct = 0;
    let mut misses = Vec::new();
    for line in data_lines(&content) {
        let pairs: Vec<(&str, PosClass)> = line
            .split_whitespace()
            .map(|p| {
                let (w, t) = p.rsplit_once('/').unwrap();
                (w, parse_tag(t))
            })
            .collect();
        let text = pairs.iter().map(|p| p.0).collect::<Vec<_>>().join(" ");
        let tokens = tokenize(&text);
        let tags: Vec<PosClass> = pos_tag(&tokens, lexicon).into_iter().flatten().collect();
        assert_eq!(tags.len(), pairs.len(), "{text}");
        for ((word, gold), got) in pairs.iter().zip(tags) {
            total += 1;
            if *gold == got {
                correct += 1;
            } else {
                misses.push(format!("{word}: {got:?} vs {gold:?}"));
            }
        }
    }
    let accuracy = correct as f64 / total as f64;
    println!("tagger accuracy {accuracy:.3} over {total} tokens; misses: {misses:?}");
    assert!(accuracy >= 0.90, "accuracy {accuracy}: {misses:?}");
}
