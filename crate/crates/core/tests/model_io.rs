use wordlink::synth::{generate, SynthConfig};
use wordlink::{read_model, train, write_model, Method, ModelHeader, Side, TrainConfig};

#[test]
fn trained_models_survive_a_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let s = generate(&SynthConfig {
        segments: 150,
        lexicon_size: 100,
        ..SynthConfig::default()
    })
    .unwrap();
    for method in [Method::A, Method::B, Method::C, Method::Model1] {
        let out = train(
            &s.bitext,
            &TrainConfig::new(method),
            Some((&s.src_classes, &s.tgt_classes)),
        )
        .unwrap();
        let header = ModelHeader {
            method,
            iterations: out.report.iteration_count(),
            converged: out.report.converged,
            links_total: out.model.links_total(),
            aux: out.aux.as_ref().map(|a| a.all_params()).unwrap_or_default(),
        };
        let path = dir.path().join(format!("{method}.tsv"));
        write_model(&path, &out.model, &header, &out.likelihoods).unwrap();
        let back = read_model(&path).unwrap();
        assert_eq!(back.header, header);
        let words = |m: &wordlink::TranslationModel, side: Side| {
            let (inp, outp) = (m.vocab(side), m.vocab(side.other()));
            m.conditional(side)
                .iter()
                .map(|(g, p, x)| (inp.word(g).to_string(), outp.word(p).to_string(), x))
                .collect::<Vec<_>>()
        };
        for side in [Side::Src, Side::Tgt] {
            assert_eq!(words(&out.model, side), words(&back.model, side), "{method}");
        }
        let path2 = dir.path().join(format!("{method}.again.tsv"));
        write_model(&path2, &back.model, &back.header, &back.like).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&path2).unwrap()
        );
    }
}
