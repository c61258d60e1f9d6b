#!/usr/bin/env python3
"""Regenerate every fixture under fixtures/.

Deterministic by construction: reference outcome vectors are laid out
block-wise from the published per-model counts, the mock corpus/scripts are
fixed text, and timing vectors are linspace-shaped with exact means. Run
from the repository root:

    python tools/make_fixtures.py
"""

from __future__ import annotations

import json
import math
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FIX = ROOT / "fixtures"

N_BENCH = 104
N_BOARD = 65
RELEVANT_BENCH = 48
RELEVANT_BOARD = 48
OVERHEAD_BENCH_S = 10554.6
OVERHEAD_BOARD_S = 5754.9

# Per-model reference results: (zero-shot count, pct, adjusted p), (rag ...),
# (rar count, pct). Counts are out of 104.
ACCURACY_ROWS = [
    ("Ministral-8B",         (49, 47, 0.020), (53, 51, 0.051), (69, 66)),
    ("Mistral Large",        (75, 72, 0.146), (77, 74, 0.273), (84, 81)),
    ("Llama3.3-8B",          (65, 62, 0.807), (66, 63, 0.999), (68, 65)),
    ("Llama3.3-70B",         (79, 76, 0.212), (76, 73, 0.081), (86, 83)),
    ("Llama3-Med42-8B",      (70, 67, 0.263), (70, 67, 0.383), (78, 75)),
    ("Llama3-Med42-70B",     (75, 72, 0.263), (78, 75, 0.705), (82, 79)),
    ("Llama4 Scout 16E",     (79, 76, 0.392), (83, 80, 0.999), (84, 81)),
    ("DeepSeek R1-70B",      (81, 78, 0.859), (79, 76, 0.662), (83, 80)),
    ("DeepSeek R1",          (85, 82, 0.859), (82, 79, 0.999), (83, 80)),
    ("DeepSeek-V3",          (79, 76, 0.106), (83, 80, 0.273), (89, 86)),
    ("Qwen 2.5-0.5B",        (38, 37, 0.726), (48, 46, 0.737), (43, 42)),
    ("Qwen 2.5-3B",          (56, 54, 0.146), (55, 53, 0.171), (68, 65)),
    ("Qwen 2.5-7B",          (57, 55, 0.041), (61, 59, 0.171), (74, 71)),
    ("Qwen 2.5-14B",         (71, 68, 0.752), (69, 67, 0.549), (75, 72)),
    ("Qwen 2.5-70B",         (73, 70, 0.185), (76, 73, 0.599), (81, 78)),
    ("Qwen 3-8B",            (69, 66, 0.157), (76, 73, 0.862), (79, 76)),
    ("Qwen 3-235B",          (85, 82, 0.999), (87, 84, 0.999), (86, 83)),
    ("GPT-3.5-turbo",        (59, 57, 0.146), (64, 62, 0.540), (71, 68)),
    ("GPT-4-turbo",          (79, 76, 0.999), (79, 76, 0.999), (80, 77)),
    ("o3",                   (89, 86, 0.781), (88, 85, 0.705), (91, 88)),
    ("GPT-5",                (85, 82, 0.097), (83, 80, 0.081), (92, 88)),
    ("MedGemma-4B-it",       (58, 56, 0.157), (54, 52, 0.051), (69, 66)),
    ("MedGemma-27B-text-it", (74, 71, 0.146), (78, 75, 0.438), (84, 81)),
    ("Gemma-3-4B-it",        (48, 46, 0.094), (55, 53, 0.273), (64, 62)),
    ("Gemma-3-27B-it",       (68, 65, 0.157), (69, 66, 0.270), (79, 76)),
]

# Per-model factuality reference: (hallucination count, pct),
# (correct-despite-irrelevant count, pct), (rescued count, pct); out of 104
# with 48 questions labeled relevant.
FACTUALITY_ROWS = [
    ("Ministral-8B",         (15, 14), (36, 35), (27, 26)),
    ("Mistral Large",        (6, 6),   (42, 40), (13, 12)),
    ("Llama3.3-8B",          (18, 17), (38, 37), (13, 12)),
    ("Llama3.3-70B",         (6, 6),   (44, 42), (11, 11)),
    ("Llama3-Med42-8B",      (11, 11), (41, 39), (17, 16)),
    ("Llama3-Med42-70B",     (7, 7),   (41, 39), (13, 12)),
    ("Llama4 Scout 16E",     (5, 5),   (41, 39), (9, 9)),
    ("DeepSeek R1-70B",      (5, 5),   (40, 38), (8, 8)),
    ("DeepSeek R1",          (3, 3),   (38, 37), (6, 6)),
    ("DeepSeek-V3",          (4, 4),   (45, 43), (13, 12)),
    ("Qwen 2.5-0.5B",        (27, 26), (22, 21), (22, 21)),
    ("Qwen 2.5-3B",          (14, 13), (34, 33), (22, 21)),
    ("Qwen 2.5-7B",          (12, 12), (38, 37), (24, 23)),
    ("Qwen 2.5-14B",         (10, 10), (37, 36), (16, 15)),
    ("Qwen 2.5-70B",         (5, 5),   (38, 37), (13, 12)),
    ("Qwen 3-8B",            (6, 6),   (37, 36), (18, 17)),
    ("Qwen 3-235B",          (5, 5),   (43, 41), (6, 6)),
    ("GPT-3.5-turbo",        (14, 13), (37, 36), (22, 21)),
    ("GPT-4-turbo",          (9, 9),   (41, 39), (8, 8)),
    ("o3",                   (2, 2),   (45, 43), (3, 3)),
    ("GPT-5",                (3, 3),   (47, 45), (7, 7)),
    ("MedGemma-4B-it",       (18, 17), (39, 38), (21, 20)),
    ("MedGemma-27B-text-it", (3, 3),   (39, 38), (16, 15)),
    ("Gemma-3-4B-it",        (21, 20), (37, 36), (26, 25)),
    ("Gemma-3-27B-it",       (7, 7),   (38, 37), (21, 20)),
]

MODEL_GROUPS = {
    "subgroups": {
        "small": [
            "Ministral-8B", "Gemma-3-4B-it", "Qwen 2.5-7B", "Qwen 2.5-3B",
            "Qwen 2.5-0.5B", "Qwen 3-8B", "Llama3.3-8B",
        ],
        "mid_sized": [
            "GPT-3.5-turbo", "Llama3.3-70B", "Mistral Large", "Qwen 2.5-70B",
            "Llama4 Scout 16E", "Gemma-3-27B-it", "DeepSeek R1-70B",
        ],
        "large": [
            "DeepSeek R1", "DeepSeek-V3", "o3", "Qwen 3-235B", "GPT-4-turbo", "GPT-5",
        ],
        "clinically_fine_tuned": [
            "MedGemma-27B-text-it", "MedGemma-4B-it", "Llama3-Med42-70B", "Llama3-Med42-8B",
        ],
    },
    "scaling_family": {
        "name": "Qwen 2.5",
        "sizes_b": [0.5, 3, 7, 14, 70],
        "models": ["Qwen 2.5-0.5B", "Qwen 2.5-3B", "Qwen 2.5-7B", "Qwen 2.5-14B", "Qwen 2.5-70B"],
    },
    "timing_groups": {
        "DeepSeek MoE group": ["DeepSeek R1", "DeepSeek-V3"],
        "Large (120-250B) group": ["Qwen 3-235B", "Mistral Large", "Llama4 Scout 16E"],
        "Medium (~70B) group": [
            "DeepSeek R1-70B", "Llama3.3-70B", "Qwen 2.5-70B", "Llama3-Med42-70B",
        ],
        "Gemma 27B group": ["Gemma-3-27B-it", "MedGemma-27B-text-it"],
        "Small (7-8B) group": [
            "Llama3-Med42-8B", "Llama3.3-8B", "Ministral-8B", "Qwen 2.5-7B", "Qwen 3-8B",
        ],
        "Mini (3-4B) group": ["Gemma-3-4B-it", "MedGemma-4B-it", "Qwen 2.5-3B"],
    },
}

SUBSPECIALTIES = [
    "Breast Imaging", "Cardiac", "Chest", "CT", "Emergency Radiology",
    "Gastrointestinal", "Genitourinary", "Head and Neck", "MRI",
    "Molecular Imaging", "Musculoskeletal", "Neuroradiology",
    "Nuclear Medicine", "Oncologic Imaging", "Pediatric",
    "Radiation Oncology", "Ultrasound", "Vascular Imaging",
]

FINDINGS = [
    "a palpable mass with irregular margins",
    "progressive dyspnea on exertion",
    "acute flank pain radiating to the groin",
    "an incidental lesion on screening imaging",
    "intermittent fevers and night sweats",
    "focal neurological deficits of sudden onset",
    "chronic joint pain unresponsive to therapy",
    "painless jaundice and weight loss",
]

PATTERNS = [
    "a well-circumscribed enhancing lesion",
    "diffuse ground-glass attenuation",
    "a lytic lesion with a narrow zone of transition",
    "rim calcification around a fat-density focus",
    "restricted diffusion with low ADC values",
    "a hypervascular mass with early washout",
    "multiple target-appearing lesions",
    "cortical thickening with periosteal reaction",
]


def write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def synthetic_dataset(name: str, prefix: str, count: int, n_options: int) -> dict:
    letters = [chr(ord("A") + i) for i in range(n_options)]
    questions = []
    for i in range(1, count + 1):
        age = 20 + (i * 7) % 60
        sex = "woman" if i % 2 else "man"
        finding = FINDINGS[i % len(FINDINGS)]
        pattern = PATTERNS[(i * 3) % len(PATTERNS)]
        stem = (
            f"Case {i}: a {age}-year-old {sex} presents with {finding}. "
            f"Imaging demonstrates {pattern}. What is the most likely diagnosis?"
        )
        options = {
            letter: f"Candidate condition {i}{letter}" for letter in letters
        }
        questions.append(
            {
                "id": f"{prefix}{i:03d}",
                "stem": stem,
                "options": options,
                "correct_letter": letters[i % n_options],
                "subspecialties": sorted(
                    {SUBSPECIALTIES[i % len(SUBSPECIALTIES)], SUBSPECIALTIES[(i * 5) % len(SUBSPECIALTIES)]}
                ),
            }
        )
    return {"name": name, "questions": questions}


# ---------------------------------------------------------------------------
# Mock pipeline: a 6-question dataset with a dedicated corpus and scripts.
# ---------------------------------------------------------------------------

MINI_QUESTIONS = [
    {
        "id": "mini-01",
        "stem": (
            "A 54-year-old woman with fevers and weight loss has a mobile, "
            "low-signal left atrial mass attached to the interatrial septum on "
            "cardiac MRI. What is the most likely diagnosis?"
        ),
        "options": {
            "A": "Cardiac myxoma",
            "B": "Papillary fibroelastoma",
            "C": "Left atrial thrombus",
            "D": "Cardiac lymphoma",
        },
        "correct_letter": "A",
        "subspecialties": ["Cardiac", "MRI"],
        "keywords": (
            "mobile left atrial mass, attachment to interatrial septum, "
            "constitutional symptoms, low signal on cardiac MRI"
        ),
        "rag_keywords": "left atrial mass, interatrial septum, cardiac MRI",
    },
    {
        "id": "mini-02",
        "stem": (
            "A 66-year-old woman has a round, circumscribed fat-containing "
            "breast mass with rim calcification on mammography, years after "
            "reduction surgery. What is the most likely diagnosis?"
        ),
        "options": {
            "A": "Fibroadenoma",
            "B": "Oil cyst",
            "C": "Invasive ductal carcinoma",
            "D": "Breast hamartoma",
        },
        "correct_letter": "B",
        "subspecialties": ["Breast Imaging"],
        "keywords": (
            "fat-containing breast mass, rim calcification, prior breast "
            "surgery, circumscribed margins"
        ),
        "rag_keywords": "breast mass, rim calcification, fat necrosis",
    },
    {
        "id": "mini-03",
        "stem": (
            "A 16-year-old with recurrent nosebleeds has a well-defined "
            "juxtahilar nodule that enhances identically to the adjacent "
            "pulmonary veins on CT angiography. What is the most likely diagnosis?"
        ),
        "options": {
            "A": "Pulmonary hamartoma",
            "B": "Carcinoid tumour",
            "C": "Pulmonary varix",
            "D": "Pericardial teratoma",
        },
        "correct_letter": "C",
        "subspecialties": ["Chest", "CT"],
        "keywords": (
            "recurrent nosebleeds, juxtahilar nodule, enhancement matching "
            "pulmonary veins, CT angiography"
        ),
        "rag_keywords": "juxtahilar nodule, pulmonary vein enhancement",
    },
    {
        "id": "mini-04",
        "stem": (
            "A 48-year-old man has an extra-axial, durally based mass with a "
            "dural tail and avid homogeneous enhancement on brain MRI. "
            "What is the most likely diagnosis?"
        ),
        "options": {
            "A": "Meningioma",
            "B": "Dural metastasis",
            "C": "Solitary fibrous tumour",
            "D": "Intracranial sarcoidosis",
        },
        "correct_letter": "A",
        "subspecialties": ["Neuroradiology", "MRI"],
        "keywords": (
            "extra-axial mass, dural tail sign, homogeneous enhancement, "
            "durally based lesion"
        ),
        "rag_keywords": "dural tail, extra-axial mass, enhancement",
    },
    {
        "id": "mini-05",
        "stem": (
            "A 39-year-old woman has an incidental hepatic lesion with "
            "peripheral nodular discontinuous enhancement and centripetal "
            "fill-in on multiphase CT. What is the most likely diagnosis?"
        ),
        "options": {
            "A": "Hepatic haemangioma",
            "B": "Focal nodular hyperplasia",
            "C": "Hepatic adenoma",
            "D": "Fibrolamellar carcinoma",
        },
        "correct_letter": "A",
        "subspecialties": ["Gastrointestinal", "CT"],
        "keywords": (
            "hepatic lesion, peripheral nodular enhancement, centripetal "
            "fill-in, multiphase CT"
        ),
        "rag_keywords": "hepatic lesion, nodular enhancement, fill-in",
    },
    {
        "id": "mini-06",
        "stem": (
            "A 19-year-old runner has night pain relieved by aspirin and a "
            "small cortical tibial lucency with surrounding sclerosis on CT. "
            "What is the most likely diagnosis?"
        ),
        "options": {
            "A": "Osteoid osteoma",
            "B": "Osteoblastoma",
            "C": "Brodie abscess",
            "D": "Stress fracture",
        },
        "correct_letter": "A",
        "subspecialties": ["Musculoskeletal", "CT"],
        "keywords": (
            "night pain relieved by aspirin, cortical tibial lucency, "
            "surrounding sclerosis, young athlete"
        ),
        "rag_keywords": "cortical lucency, sclerosis, tibia",
    },
]

# Option with no corpus coverage at all: exercises the 4-attempt limitation path.
UNCOVERED = ("mini-03", "D")

BODY_SENTENCES = {
    "Cardiac myxoma": (
        "Cardiac myxoma is the commonest primary cardiac tumour, typically a "
        "mobile left atrial mass attached to the interatrial septum. "
        "Constitutional symptoms such as fevers and weight loss are common, "
        "and signal is often low with heterogeneous enhancement."
    ),
    "Papillary fibroelastoma": (
        "Papillary fibroelastoma is a small valvular tumour, most often on "
        "the aortic valve, with a characteristic shimmering frond-like "
        "appearance on echocardiography and little systemic upset."
    ),
    "Left atrial thrombus": (
        "Left atrial thrombus usually forms in the atrial appendage in the "
        "setting of atrial fibrillation or mitral valve disease, and shows no "
        "internal enhancement after contrast."
    ),
    "Cardiac lymphoma": (
        "Cardiac lymphoma is a rare infiltrative cardiac mass, most often "
        "right-sided, seen particularly in immunocompromised patients, with "
        "accompanying effusions around the heart."
    ),
    "Fibroadenoma": (
        "Fibroadenoma is the classic benign solid breast mass of younger "
        "women: oval, circumscribed, and equal density, sometimes with coarse "
        "popcorn calcification when involuting."
    ),
    "Oil cyst": (
        "Oil cyst is a benign sequela of fat necrosis after breast trauma or "
        "surgery: a round, circumscribed fat-density mass, classically with "
        "rim calcification on mammography."
    ),
    "Invasive ductal carcinoma": (
        "Invasive ductal carcinoma commonly presents as an irregular, "
        "spiculated high-density mass, often with pleomorphic calcification; "
        "fat density within the lesion argues strongly against it."
    ),
    "Breast hamartoma": (
        "Breast hamartoma is a circumscribed encapsulated lesion containing "
        "both fat and fibroglandular elements, giving the classic "
        "breast-within-a-breast appearance."
    ),
    "Pulmonary hamartoma": (
        "Pulmonary hamartoma is a well-defined peripheral nodule with "
        "popcorn calcification and macroscopic fat on CT, slow growing and "
        "benign."
    ),
    "Carcinoid tumour": (
        "Carcinoid tumour of the lung is typically a central endobronchial "
        "nodule with avid homogeneous enhancement and may cause recurrent "
        "collapse or wheeze."
    ),
    "Pulmonary varix": (
        "Pulmonary varix is a focal dilatation of a pulmonary vein that "
        "enhances exactly in phase with the adjacent pulmonary veins, a "
        "juxtahilar nodule that needs no treatment and has no feeding artery."
    ),
    "Meningioma": (
        "Meningioma is the archetypal extra-axial durally based mass with a "
        "dural tail and avid homogeneous enhancement, often with a CSF cleft "
        "and hyperostosis of the adjacent calvarium."
    ),
    "Dural metastasis": (
        "Dural metastasis can mimic other durally based masses but usually "
        "occurs with a known primary, multiplicity, and adjacent bone "
        "destruction rather than hyperostosis."
    ),
    "Solitary fibrous tumour": (
        "Solitary fibrous tumour of the dura is a hypervascular extra-axial "
        "mass that may lack a dural tail, with prominent flow voids and a "
        "narrow dural base."
    ),
    "Intracranial sarcoidosis": (
        "Intracranial sarcoidosis produces nodular dural and leptomeningeal "
        "thickening with enhancement, usually with systemic disease and "
        "perivascular spread."
    ),
    "Hepatic haemangioma": (
        "Hepatic haemangioma shows peripheral nodular discontinuous "
        "enhancement following blood pool, with centripetal fill-in on "
        "delayed phases; it is the commonest benign liver lesion."
    ),
    "Focal nodular hyperplasia": (
        "Focal nodular hyperplasia enhances homogeneously and intensely in "
        "the arterial phase and becomes isodense later, with a central scar "
        "that enhances on delayed images."
    ),
    "Hepatic adenoma": (
        "Hepatic adenoma occurs in young women on oral contraceptives, may "
        "contain fat or haemorrhage, and enhances heterogeneously without "
        "centripetal progression."
    ),
    "Fibrolamellar carcinoma": (
        "Fibrolamellar carcinoma is a large lobulated mass of younger "
        "patients with a central non-enhancing scar and calcification, "
        "without cirrhosis."
    ),
    "Osteoid osteoma": (
        "Osteoid osteoma is a cortical lucent nidus under 1.5 cm with "
        "surrounding reactive sclerosis, classically causing night pain "
        "relieved by aspirin in young patients."
    ),
    "Osteoblastoma": (
        "Osteoblastoma resembles a large nidus over 2 cm, favours the "
        "posterior elements of the spine, and is less responsive to "
        "salicylates."
    ),
    "Brodie abscess": (
        "Brodie abscess is subacute osteomyelitis: a metaphyseal lucency "
        "with a sclerotic rim and a serpentine channel sign, often without "
        "systemic signs."
    ),
    "Stress fracture": (
        "Stress fracture of the tibia shows a linear cortical lucency with "
        "fusiform periosteal reaction along the posteromedial cortex in "
        "runners, with activity-related pain."
    ),
}


def slug(text: str) -> str:
    return text.lower().replace(" ", "-")


def corpus_pages() -> list[dict]:
    pages = []
    for q in MINI_QUESTIONS:
        for letter, option in q["options"].items():
            if (q["id"], letter) == UNCOVERED:
                continue
            body = BODY_SENTENCES[option]
            pages.append(
                {
                    "url": f"https://radiopaedia.org/articles/{slug(option)}-overview",
                    "title": f"{option} | reference article",
                    "body": f"{option}. {body}",
                }
            )
            pages.append(
                {
                    "url": f"https://radiopaedia.org/cases/{slug(option)}-case",
                    "title": f"{option}: illustrative case",
                    "body": (
                        f"{option} shown on imaging. {body} This case illustrates the "
                        "typical appearance."
                    ),
                }
            )
    banned = ("pericardial", "teratoma")
    for page in pages:
        text = (page["title"] + " " + page["body"]).lower()
        for word in banned:
            assert word not in text, f"corpus page leaks {word!r}: {page['url']}"
    return pages


def dedicated_urls(option: str) -> list[str]:
    return [
        f"https://radiopaedia.org/articles/{slug(option)}-overview",
        f"https://radiopaedia.org/cases/{slug(option)}-case",
    ]


SECTION_SUPPORT = {
    "mini-01": "The retrieved descriptions match a mobile septal-based atrial mass with systemic upset.",
    "mini-02": "The retrieved descriptions match a circumscribed fat-density mass with rim calcification.",
    "mini-03": "The retrieved descriptions weigh enhancement behaviour of a juxtahilar nodule.",
    "mini-04": "The retrieved descriptions centre on a durally based enhancing extra-axial mass.",
    "mini-05": "The retrieved descriptions centre on enhancement kinetics of a liver lesion.",
    "mini-06": "The retrieved descriptions centre on a painful cortical tibial lucency.",
}


def controller_script() -> list[dict]:
    rules = []
    for q in MINI_QUESTIONS:
        qid = q["id"]
        letters = list(q["options"])
        plan_lines = [
            f"{letter}: Gather reference descriptions of {q['options'][letter]} and weigh them against the presented imaging and clinical features."
            for letter in letters
        ]
        rules.append(
            {
                "contains_all": [f"Question ID: {qid}", "Produce a research plan"],
                "response": "\n".join(plan_lines),
            }
        )
        for letter in letters:
            option = q["options"][letter]
            if (qid, letter) == UNCOVERED:
                response = (
                    "BODY:\n"
                    f"No reference description of {option.lower()} was retrieved; the "
                    "available excerpts do not address this entity, so it cannot be "
                    "weighed against the imaging findings from source material.\n"
                    "SUPPORTING:\n"
                    "CONTRADICTING:\n"
                    f"- None of the retrieved excerpts mention {option.lower()}\n"
                    "CITATIONS:\n"
                )
            else:
                urls = dedicated_urls(option)
                response = (
                    "BODY:\n"
                    f"{BODY_SENTENCES[option]} {SECTION_SUPPORT[qid]}\n"
                    "SUPPORTING:\n"
                    f"- Reference features of {option.lower()} overlap with the presentation\n"
                    "CONTRADICTING:\n"
                    f"- Some described hallmarks of {option.lower()} are not reported in this case\n"
                    "CITATIONS:\n"
                    f"- {urls[0]}\n"
                    f"- {urls[1]}\n"
                )
            rules.append(
                {
                    "contains_all": [
                        f"Question ID: {qid}",
                        f"report section for option {letter}:",
                    ],
                    "response": response,
                }
            )
        rules.append(
            {
                "contains_all": [f"Question ID: {qid}", "neutral introduction"],
                "response": (
                    f"This report concerns the following presentation: {q['stem']} "
                    "The sections below summarize retrieved reference material for "
                    "each candidate diagnosis in turn."
                ),
            }
        )
        option_clause = "; ".join(
            f"{q['options'][letter]} is weighed in its section" for letter in letters
        )
        rules.append(
            {
                "contains_all": [f"Question ID: {qid}", "neutral conclusion"],
                "response": (
                    f"Each candidate was assessed against the retrieved material: {option_clause}. "
                    "Supporting and contradicting findings are set out above so the reader "
                    "can weigh the differential on the cited evidence."
                ),
            }
        )
    # Refinement proposals for the one option whose retrieval never succeeds.
    rules.append(
        {
            "contains_all": ["Retrieval attempt 3 for option D", "Question ID: mini-03"],
            "response": "intrapericardial germ cell mass",
        }
    )
    rules.append(
        {
            "contains_all": ["Retrieval attempt 4 for option D", "Question ID: mini-03"],
            "response": "mediastinal germ cell tumour infant",
        }
    )
    return rules


def summarizer_script() -> list[dict]:
    rules = []
    for q in MINI_QUESTIONS:
        stem_snip = q["stem"][:60]
        rules.append(
            {
                "contains_all": ["Extract and summarize the key clinical details", stem_snip],
                "response": q["keywords"],
            }
        )
        rules.append(
            {
                "contains_all": ["List up to five representative radiology keywords", stem_snip],
                "response": q["rag_keywords"],
            }
        )
    return rules


MODEL_ANSWERS = {
    # question id -> (zero-shot response, rag response, rar response)
    "mini-01": ("A", "A: Cardiac myxoma", "Final Answer: A: Cardiac myxoma"),
    "mini-02": (
        "The findings favour invasive ductal carcinoma.",
        "B",
        "B: Oil cyst",
    ),
    "mini-03": ("I don't know.", "I don't know.", "C: Pulmonary varix"),
    "mini-04": ("Final Answer: A", "A", "A: Meningioma"),
    "mini-05": (
        "D: Fibrolamellar carcinoma",
        "Hepatic haemangioma is most likely.",
        "A: Hepatic haemangioma",
    ),
    "mini-06": (
        "Most consistent with a stress fracture.",
        "B: Osteoblastoma",
        "D",
    ),
}


def model_script() -> list[dict]:
    rules = []
    for q in MINI_QUESTIONS:
        stem_snip = q["stem"][:60]
        zs, rag, rar = MODEL_ANSWERS[q["id"]]
        # Report-backed prompts also contain the retrieval template text, so
        # they must be matched first.
        rules.append({"contains_all": [stem_snip, "Introduction:"], "response": rar})
        rules.append(
            {"contains_all": [stem_snip, "relevant context (report)"], "response": rag}
        )
        rules.append(
            {"contains_all": [stem_snip, "Provide the correct answer"], "response": zs}
        )
    return rules


def mock_config() -> dict:
    return {
        "dataset": "../datasets/mini6.json",
        "strategies": ["zero_shot", "rag", "rar"],
        "models": [
            {
                "name": "mock-model",
                "backend": {"type": "scripted", "script": "model_script.json"},
            }
        ],
        "controller": {"type": "scripted", "script": "controller_script.json"},
        "summarizer": {"type": "scripted", "script": "summarizer_script.json"},
        "judge": {"type": "scripted", "script": "judge_script.json"},
        "search": {"type": "fixture", "pages_dir": "corpus"},
        "rag": {
            "keyword_backend": {"type": "scripted", "script": "summarizer_script.json"},
            "embed_backend": {"type": "scripted", "script": "summarizer_script.json"},
            "articles_per_keyword": 3,
        },
        "output_dir": "out",
        "parallelism": 2,
        "seed": 17,
    }


def judge_script() -> list[dict]:
    """Yes/No rules keyed on the exact (response, reference) pairs of the mock run."""
    rules = []
    for q in MINI_QUESTIONS:
        correct = q["correct_letter"]
        reference = f"{correct}: {q['options'][correct]}"
        for response in MODEL_ANSWERS[q["id"]]:
            # The scripted judge mirrors the deterministic matcher's verdicts.
            contains_letter = any(
                token == correct or token.rstrip(".,:;") == correct
                for token in response.replace(":", " : ").split()
            )
            contains_text = q["options"][correct].lower() in response.lower()
            verdict = "Yes" if (contains_letter or contains_text) else "No"
            rules.append(
                {
                    "contains_all": [f"LLMs response:\n\n{response}\n", reference],
                    "response": verdict,
                }
            )
    return rules


# ---------------------------------------------------------------------------
# Reference outcome vectors consistent with both reference tables.
# ---------------------------------------------------------------------------


def build_outcomes(question_ids: list[str]) -> dict:
    n = len(question_ids)
    relevant = RELEVANT_BENCH
    fact = {row[0]: row for row in FACTUALITY_ROWS}
    models = {}
    for model, (zs_count, _, _), (rag_count, _, _), (rar_count, _) in ACCURACY_ROWS:
        _, (halluc, _), (despite, _), (rescued, _) = fact[model]
        assert relevant - halluc + despite == rar_count, model
        # Report-strategy outcomes: block layout against the relevance split.
        rar = [False] * n
        for i in range(relevant - halluc):
            rar[i] = True
        for i in range(despite):
            rar[relevant + i] = True
        # Zero-shot outcomes: overlap with the report strategy is fixed by the
        # rescue count.
        both = rar_count - rescued
        zs_only = zs_count - both
        rar_true = [i for i, v in enumerate(rar) if v]
        rar_false = [i for i, v in enumerate(rar) if not v]
        assert 0 <= both <= len(rar_true), model
        assert 0 <= zs_only <= len(rar_false), model
        zs = [False] * n
        for i in rar_true[:both]:
            zs[i] = True
        for i in rar_false[:zs_only]:
            zs[i] = True
        rag = [i < rag_count for i in range(n)]
        assert sum(rar) == rar_count and sum(zs) == zs_count and sum(rag) == rag_count, model
        assert sum(1 for i in range(relevant) if not rar[i]) == halluc, model
        assert sum(1 for i in range(relevant, n) if rar[i]) == despite, model
        assert sum(1 for i in range(n) if rar[i] and not zs[i]) == rescued, model
        models[model] = {"zero_shot": zs, "rag": rag, "rar": rar}
    return {"n": n, "question_ids": question_ids, "models": models}


def calibrated_vector(mean: float, sd: float, n: int) -> list[float]:
    """Evenly spaced values with the exact target mean and sample sd; no upper outliers."""
    base = [(2.0 * i / (n - 1)) - 1.0 for i in range(n)]
    base_mean = sum(base) / n
    centered = [b - base_mean for b in base]
    base_sd = math.sqrt(sum(c * c for c in centered) / (n - 1))
    values = [mean + sd * c / base_sd for c in centered]
    assert min(values) > 0.0, "calibrated vector must stay positive"
    return [round(v, 6) for v in values]


def timing_fixture() -> dict:
    overhead_per_question = OVERHEAD_BENCH_S / N_BENCH
    rar_raw_mean = 122.8 - overhead_per_question
    return {
        "n": N_BENCH,
        "overhead_s": OVERHEAD_BENCH_S,
        "models": {
            "Qwen 2.5-7B": {
                "zero_shot": calibrated_vector(3.4, 1.6, N_BENCH),
                "rar": calibrated_vector(rar_raw_mean, 11.4, N_BENCH),
            }
        },
    }


def main() -> None:
    bench = synthetic_dataset("benchmark104", "Q", N_BENCH, 4)
    board = synthetic_dataset("board65", "BQ", N_BOARD, 5)
    write_json(FIX / "datasets" / "benchmark104.json", bench)
    write_json(FIX / "datasets" / "board65.json", board)
    write_json(
        FIX / "datasets" / "mini6.json",
        {
            "name": "mini6",
            "questions": [
                {k: q[k] for k in ("id", "stem", "options", "correct_letter", "subspecialties")}
                for q in MINI_QUESTIONS
            ],
        },
    )

    for page in corpus_pages():
        name = page["url"].rsplit("/", 1)[-1]
        write_json(FIX / "mock" / "corpus" / f"{name}.json", page)
    write_json(FIX / "mock" / "controller_script.json", controller_script())
    write_json(FIX / "mock" / "summarizer_script.json", summarizer_script())
    write_json(FIX / "mock" / "model_script.json", model_script())
    write_json(FIX / "mock" / "judge_script.json", judge_script())
    write_json(FIX / "mock" / "config.json", mock_config())
    write_json(
        FIX / "mock" / "labels_mini6.json",
        {q["id"]: q["id"] in ("mini-01", "mini-02", "mini-04") for q in MINI_QUESTIONS},
    )

    question_ids = [q["id"] for q in bench["questions"]]
    write_json(
        FIX / "reference" / "accuracy_counts.json",
        {
            "n": N_BENCH,
            "rows": [
                {
                    "model": model,
                    "zero_shot": {"count": zs[0], "reported_pct": zs[1], "reported_p_adj": zs[2]},
                    "rag": {"count": rag[0], "reported_pct": rag[1], "reported_p_adj": rag[2]},
                    "rar": {"count": rar[0], "reported_pct": rar[1]},
                }
                for model, zs, rag, rar in ACCURACY_ROWS
            ],
        },
    )
    write_json(
        FIX / "reference" / "factuality_counts.json",
        {
            "n": N_BENCH,
            "relevant": RELEVANT_BENCH,
            "rows": [
                {
                    "model": model,
                    "hallucination": {"count": h[0], "reported_pct": h[1]},
                    "correct_despite_irrelevant": {"count": c[0], "reported_pct": c[1]},
                    "rescued": {"count": r[0], "reported_pct": r[1]},
                }
                for model, h, c, r in FACTUALITY_ROWS
            ],
            "reported_average": {
                "hallucination": [9.2, 6.1],
                "correct_despite_irrelevant": [37.4, 4.9],
                "rescued": [14.3, 6.5],
            },
        },
    )
    write_json(FIX / "reference" / "outcomes_104.json", build_outcomes(question_ids))
    write_json(
        FIX / "reference" / "labels_104.json",
        {qid: i < RELEVANT_BENCH for i, qid in enumerate(question_ids)},
    )
    write_json(
        FIX / "reference" / "labels_65.json",
        {q["id"]: i < RELEVANT_BOARD for i, q in enumerate(board["questions"])},
    )
    write_json(FIX / "reference" / "model_groups.json", MODEL_GROUPS)
    write_json(FIX / "reference" / "timing_qwen25_7b.json", timing_fixture())
    write_json(
        FIX / "reference" / "overheads.json",
        {
            "benchmark104": {"overhead_s": OVERHEAD_BENCH_S, "n": N_BENCH},
            "board65": {"overhead_s": OVERHEAD_BOARD_S, "n": N_BOARD},
        },
    )
    print(f"fixtures written under {FIX}")


if __name__ == "__main__":
    main()
