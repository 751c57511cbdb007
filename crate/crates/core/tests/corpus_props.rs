use proptest::prelude::*;
use ser_core::classifier::{EmotionLabel, Gender};
use ser_core::corpus::{
    parse_sample_name, sample_file_name, split_train_test, CorpusError, Dataset, EmotionTokens,
    SampleMeta,
};
use ser_core::synth::SynthSpec;
use std::collections::BTreeSet;

#[test]
fn paper_sample_names() {
    let tokens = EmotionTokens::default();
    let cases = [
        ("cc_001(m)_hotAnger_4.wav", "cc_001", Gender::M, EmotionLabel::Angry),
        ("gg_001(f)_sadness_passive_negative_13a.wav", "gg_001", Gender::F, EmotionLabel::Sad),
        ("cl_001(m)_happy_active_positive_4.wav", "cl_001", Gender::M, EmotionLabel::Happy),
    ];
    for (name, speaker, gender, emotion) in cases {
        let meta = parse_sample_name(name, &tokens).unwrap();
        assert_eq!(
            (meta.speaker_id.as_str(), meta.gender, meta.emotion),
            (speaker, gender, emotion)
        );
    }
}

#[test]
fn synth_names_parse_back() {
    let tokens = EmotionTokens::default();
    for spec in [SynthSpec::default(), SynthSpec::gender_confounded()] {
        for u in spec.plan() {
            let meta = parse_sample_name(&u.file_name, &tokens).unwrap();
            assert_eq!((meta.gender, meta.emotion), (u.gender, u.emotion));
            assert_eq!(meta.speaker_id, u.speaker_id);
        }
    }
}

fn dataset(counts: &[usize; 8]) -> Dataset {
    let mut samples = Vec::new();
    for (cell, &n) in counts.iter().enumerate() {
        let emotion = EmotionLabel::ALL[cell % 4];
        let gender = Gender::ALL[cell / 4];
        for i in 0..n {
            samples.push(SampleMeta {
                path: sample_file_name("sp_001", gender, emotion, i),
                speaker_id: "sp_001".into(),
                gender,
                emotion,
                dataset_tag: None,
            });
        }
    }
    Dataset::new(samples).unwrap()
}

#[test]
fn hundred_samples_split_seventy_thirty() {
    let ds = dataset(&[13, 12, 12, 13, 12, 13, 13, 12]);
    assert_eq!(ds.len(), 100);
    let (train, test) = split_train_test(&ds, 0.7, 7).unwrap();
    assert_eq!((train.len(), test.len()), (70, 30));
    assert_eq!(split_train_test(&ds, 0.7, 7).unwrap(), (train, test));
    assert_eq!(split_train_test(&ds, 1.0, 7), Err(CorpusError::InvalidFraction));
    assert_eq!(split_train_test(&ds, 0.0, 7), Err(CorpusError::InvalidFraction));
}

#[test]
fn empty_stratum_is_reported() {
    let ds = dataset(&[3, 3, 0, 3, 3, 3, 3, 3]);
    assert_eq!(
        split_train_test(&ds, 0.7, 1),
        Err(CorpusError::EmptyStratum(EmotionLabel::Angry, Gender::M))
    );
}

proptest! {
    #[test]
    fn split_is_a_stratified_partition(
        counts in prop::array::uniform8(1usize..20),
        fraction in 0.05f64..0.95,
        seed in any::<u64>(),
    ) {
        let ds = dataset(&counts);
        let (train, test) = split_train_test(&ds, fraction, seed).unwrap();
        let all: BTreeSet<&str> = ds.samples().iter().map(|s| s.path.as_str()).collect();
        let a: BTreeSet<&str> = train.samples().iter().map(|s| s.path.as_str()).collect();
        let b: BTreeSet<&str> = test.samples().iter().map(|s| s.path.as_str()).collect();
        prop_assert!(a.is_disjoint(&b));
        prop_assert_eq!(a.union(&b).copied().collect::<BTreeSet<_>>(), all);
        prop_assert_eq!(train.len(), (fraction * ds.len() as f64).round() as usize);
        for gender in Gender::ALL {
            for emotion in EmotionLabel::ALL {
                let n = ds.count(emotion, gender) as f64;
                let got = train.count(emotion, gender) as f64;
                prop_assert!((got - fraction * n).abs() <= 1.0);
            }
        }
    }
}
