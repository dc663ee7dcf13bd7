use citepref::ideas::stem;

#[test]
fn stemmer_matches_reference_vocabulary() {
    let data = include_str!("fixtures/porter_vocabulary.tsv");
    let mut total = 0;
    let mut wrong = Vec::new();
    for line in data.lines() {
        let (word, expected) = line.split_once('\t').expect("word<TAB>stem");
        total += 1;
        let got = stem(word);
        if got != expected {
            wrong.push(format!("{word}: got {got}, expected {expected}"));
        }
    }
    assert!(total > 40_000);
    assert!(wrong.is_empty(), "{} of {total} mismatches, first: {:?}", wrong.len(), &wrong[..wrong.len().min(20)]);
}
