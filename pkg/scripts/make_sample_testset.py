#!/usr/bin/env python3
"""Generate the shipped sample test set (126 four-option questions).

Deterministic: question ids, option order, and correct indices come out
identical on every run, so tests can rely on the committed JSONL file.

Run from the repository root:

    python3 scripts/make_sample_testset.py
"""

from __future__ import annotations

import json
import random
from pathlib import Path

OUT_PATH = Path(__file__).resolve().parent.parent / "fixtures" / "testset" / "sample_mcq.jsonl"

CLASSES = {
    "monoterpene": ("10", "2"),
    "sesquiterpene": ("15", "3"),
    "diterpene": ("20", "4"),
    "triterpene": ("30", "6"),
    "tetraterpene": ("40", "8"),
}

COMPOUNDS = [
    # (name, class)
    ("limonene", "monoterpene"),
    ("menthol", "monoterpene"),
    ("alpha-pinene", "monoterpene"),
    ("linalool", "monoterpene"),
    ("camphor", "monoterpene"),
    ("geraniol", "monoterpene"),
    ("thymol", "monoterpene"),
    ("carvone", "monoterpene"),
    ("artemisinin", "sesquiterpene"),
    ("farnesol", "sesquiterpene"),
    ("beta-caryophyllene", "sesquiterpene"),
    ("humulene", "sesquiterpene"),
    ("nootkatone", "sesquiterpene"),
    ("zingiberene", "sesquiterpene"),
    ("paclitaxel", "diterpene"),
    ("steviol", "diterpene"),
    ("sclareol", "diterpene"),
    ("carnosic acid", "diterpene"),
    ("ginkgolide A", "diterpene"),
    ("cafestol", "diterpene"),
    ("squalene", "triterpene"),
    ("betulinic acid", "triterpene"),
    ("oleanolic acid", "triterpene"),
    ("ursolic acid", "triterpene"),
    ("cucurbitacin E", "triterpene"),
    ("lupeol", "triterpene"),
    ("beta-carotene", "tetraterpene"),
    ("lycopene", "tetraterpene"),
    ("lutein", "tetraterpene"),
    ("zeaxanthin", "tetraterpene"),
    ("astaxanthin", "tetraterpene"),
    ("fucoxanthin", "tetraterpene"),
]

SOURCES = [
    ("paclitaxel", "Pacific yew bark", ["tomato fruit", "hop cones", "ginger rhizome"], "d001"),
    ("artemisinin", "sweet wormwood leaf", ["birch bark", "citrus peel", "shark liver"], "d002"),
    ("limonene", "citrus peel", ["pine resin", "marigold petals", "ginseng root"], "d003"),
    ("menthol", "peppermint", ["caraway seed", "brown algae", "carrot root"], "d004"),
    ("squalene", "shark liver and olive oil", ["thyme leaf", "grapefruit rind", "yew needles"], "d010"),
    ("beta-carotene", "carrot root", ["peppermint leaf", "birch bark", "hop cones"], "d007"),
    ("lycopene", "tomato fruit", ["spearmint leaf", "wormwood leaf", "coffee beans"], None),
    ("lutein", "marigold petals", ["shark liver", "citrus peel", "ginger rhizome"], None),
    ("camphor", "camphor laurel wood", ["tomato fruit", "ginseng root", "olive oil"], None),
    ("thymol", "thyme leaf", ["carrot root", "yew bark", "brown algae"], None),
    ("carvone", "spearmint and caraway", ["pine resin", "salmon flesh", "birch bark"], None),
    ("zingiberene", "ginger rhizome", ["citrus peel", "marigold petals", "hop cones"], None),
    ("humulene", "hop cones", ["peppermint leaf", "tomato fruit", "wormwood leaf"], None),
    ("nootkatone", "grapefruit rind", ["birch bark", "coffee beans", "ginger rhizome"], None),
    ("betulinic acid", "birch bark", ["citrus peel", "thyme leaf", "carrot root"], None),
    ("ginsenoside Rg1", "ginseng root", ["hop cones", "spearmint leaf", "shark liver"], None),
    ("fucoxanthin", "brown algae", ["yew bark", "caraway seed", "tomato fruit"], None),
    ("astaxanthin", "microalgae and salmon", ["birch bark", "peppermint leaf", "citrus peel"], None),
]

PHARMACOLOGY = [
    ("What cellular structure does paclitaxel stabilize?", "microtubules",
     ["actin filaments", "nuclear lamina", "desmosomes"], "d001"),
    ("Which tubulin subunit carries the paclitaxel binding site?", "beta",
     ["alpha", "gamma", "epsilon"], "d001"),
    ("At which cell-cycle boundary do paclitaxel-treated cells arrest?", "G2/M",
     ["G0/G1", "G1/S", "mid-S phase"], "d001"),
    ("Which structural feature is the pharmacophore of artemisinin?", "the endoperoxide bridge",
     ["the lactone carbonyl", "the methyl substituents", "the fused cyclohexane"], "d002"),
    ("What activates artemisinin inside blood-stage malaria parasites?", "ferrous heme",
     ["parasite kinases", "host antibodies", "alkaline pH"], "d002"),
    ("Which ion channel mediates the cooling sensation of menthol?", "TRPM8",
     ["TRPV1", "Nav1.7", "GABA-A"], "d004"),
    ("Which dose-limiting toxicity appears first on taxane therapy?", "neutropenia",
     ["nephrotoxicity", "ototoxicity", "retinopathy"], "d001"),
    ("Cumulative exposure to taxanes most often forces discontinuation through which toxicity?",
     "peripheral neuropathy", ["hair-cell loss", "hepatic fibrosis", "QT prolongation"], "d001"),
    ("Artemisinin derivatives are first-line therapy against which disease?", "malaria",
     ["tuberculosis", "influenza", "schistosomiasis"], "d002"),
    ("Steviol glycosides taste sweet by activating which receptor?",
     "the T1R2/T1R3 sweet receptor", ["TRPM8", "bitter receptor TAS2R4 only", "the umami receptor"], "d008"),
    ("Squalene emulsions serve what role in vaccines?", "adjuvant",
     ["antigen", "preservative", "buffer"], "d010"),
    ("Beta-carotene is a dietary precursor of which vitamin?", "vitamin A",
     ["vitamin C", "vitamin D", "vitamin K"], "d007"),
    ("Dietary lutein concentrates in which tissue?", "the macula of the retina",
     ["the adrenal cortex", "cardiac muscle", "the thyroid"], "d007"),
    ("Why does paclitaxel spare most non-dividing cells?",
     "its lethality requires passage through mitosis",
     ["it cannot enter quiescent cells", "it is pumped out by neurons",
      "it only activates in acidic tumors"], "d001"),
    ("What sensation does topical menthol evoke without changing skin temperature?", "cooling",
     ["warmth", "numbness only", "itch"], "d004"),
]

BIOSYNTHESIS = [
    ("Which molecule starts the mevalonate pathway?", "acetyl-CoA",
     ["pyruvate", "citrate", "glucose-6-phosphate"], "d005"),
    ("In plant cells, where does the MEP pathway operate?", "plastids",
     ["mitochondria", "peroxisomes", "the nucleus"], "d005"),
    ("Which two metabolites feed the MEP pathway?", "pyruvate and glyceraldehyde-3-phosphate",
     ["two acetyl-CoA units", "malate and citrate", "serine and glycine"], "d005"),
    ("Which pair of five-carbon diphosphates feeds all terpenoid assembly?", "IPP and DMAPP",
     ["GPP and FPP", "ATP and GTP", "NADH and FADH2"], "d005"),
    ("Statin drugs inhibit the committed enzyme of which pathway?", "the mevalonate pathway",
     ["the MEP pathway", "glycolysis", "beta-oxidation"], "d005"),
    ("How do class I terpene synthases launch their carbocation cascade?",
     "by ionizing the substrate diphosphate", ["by protonating a double bond",
     "by radical abstraction", "by epoxide opening"], "d005"),
    ("Which metal ions grip the diphosphate in class I synthase active sites?", "magnesium",
     ["zinc", "iron", "copper"], "d005"),
    ("Which linear precursor is cyclized into monoterpenes?", "geranyl diphosphate",
     ["farnesyl diphosphate", "geranylgeranyl diphosphate", "squalene"], "d005"),
    ("Which linear precursor is cyclized into sesquiterpenes?", "farnesyl diphosphate",
     ["geranyl diphosphate", "phytoene", "mevalonate"], "d005"),
    ("Which linear precursor is cyclized into diterpenes?", "geranylgeranyl diphosphate",
     ["farnesyl diphosphate", "geranyl diphosphate", "isopentenyl diphosphate"], "d005"),
    ("Why is one terpene synthase able to emit dozens of products?",
     "a single active site can route one carbocation cascade many ways",
     ["it carries dozens of active sites", "it swaps substrates mid-reaction",
      "it uses light to switch specificity"], "d005"),
    ("Which kingdom relies exclusively on the mevalonate route for terpenoid precursors?",
     "animals", ["plants", "cyanobacteria", "most eubacteria"], "d005"),
    ("The absence of the MEP pathway in humans makes its enzymes candidates for what?",
     "antimicrobial drug targets", ["vaccine antigens", "dietary supplements",
     "anesthetic targets"], "d005"),
]

INDUSTRY = [
    ("Besides flavoring, limonene is widely used industrially as what?",
     "a renewable degreasing solvent", ["a vaccine adjuvant", "a refrigerant",
     "a polymerization catalyst"], "d003"),
    ("Purified steviol glycosides are approved in food as what?", "a high-intensity sweetener",
     ["a preservative", "an emulsifier", "a colorant"], "d008"),
    ("Modern paclitaxel supply relies on which strategy?",
     "semisynthesis from a renewable needle precursor",
     ["total synthesis at plant scale", "continued bark harvest", "marine sponge culture"], "d009"),
    ("Industrial artemisinin supply was stabilized by which approach?",
     "fermented artemisinic acid finished photochemically",
     ["full chemical synthesis", "synthetic biology in mammalian cells",
      "high-pressure extraction of roots"], "d009"),
    ("Cold pressing is preferred over distillation for citrus oil because it preserves what?",
     "thermally fragile aldehydes", ["the peel pectin", "chlorophyll",
     "water-soluble vitamins"], "d003"),
    ("Fermentation-derived squalene matters to vaccine makers because it replaces what source?",
     "shark liver oil", ["petroleum distillate", "palm kernel oil", "beef tallow"], "d010"),
]


def build_questions() -> list[dict]:
    questions = []

    def add(stem, correct_text, distractors, discipline, source_ref=None):
        qid = f"q{len(questions) + 1:03d}"
        options = [correct_text] + list(distractors)
        rng = random.Random(f"sample-testset:{qid}")
        rng.shuffle(options)
        questions.append(
            {
                "qid": qid,
                "stem": stem,
                "options": options,
                "correct": options.index(correct_text),
                "discipline": discipline,
                "source_ref": source_ref,
            }
        )

    class_names = list(CLASSES)
    for name, cls in COMPOUNDS:
        others = [c for c in class_names if c != cls]
        add(f"Which terpenoid class does {name} belong to?", cls, others[:3], "chemistry")
    for name, cls in COMPOUNDS:
        carbons, _ = CLASSES[cls]
        wrong = [c for c, _ in CLASSES.values() if c != carbons][:3]
        add(
            f"How many carbon atoms form the parent skeleton of {name}?",
            carbons,
            wrong,
            "chemistry",
        )
    for cls, (carbons, units) in CLASSES.items():
        wrong_c = [c for c, _ in CLASSES.values() if c != carbons][:3]
        add(f"How many carbons does a {cls} skeleton contain?", carbons, wrong_c, "chemistry")
        wrong_u = [u for _, u in CLASSES.values() if u != units][:3]
        add(f"How many isoprene units assemble a {cls}?", units, wrong_u, "chemistry")
    for name, source, distractors, ref in SOURCES:
        add(f"Which natural source is classically associated with {name}?",
            source, distractors, "botany", ref)
    for stem, correct_text, distractors, ref in PHARMACOLOGY:
        add(stem, correct_text, distractors, "pharmacology", ref)
    for stem, correct_text, distractors, ref in BIOSYNTHESIS:
        add(stem, correct_text, distractors, "biosynthesis", ref)
    for stem, correct_text, distractors, ref in INDUSTRY:
        add(stem, correct_text, distractors, "industry", ref)
    return questions


def main() -> None:
    questions = build_questions()
    assert len(questions) == 126, f"expected 126 questions, built {len(questions)}"
    OUT_PATH.parent.mkdir(parents=True, exist_ok=True)
    with OUT_PATH.open("w", encoding="utf-8") as handle:
        for question in questions:
            handle.write(json.dumps(question, ensure_ascii=False) + "\n")
    print(f"wrote {len(questions)} questions to {OUT_PATH}")


if __name__ == "__main__":
    main()
