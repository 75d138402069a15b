#!/usr/bin/env python3
"""Regenerates the files under fixtures/.

The QADI-style fixture is a synthetic test set whose per-class counts match
a reference classification report (18 countries, 3303 samples) and whose
judgments match reference per-dialect counts of false positives judged
valid. Sentences are invented except for fourteen known valid false
positives, which are placed in their (gold, predicted) cells.

Usage: tools/make_fixtures.py [output-dir]
"""
import json
import random
import sys
import unicodedata
from datetime import datetime, timedelta, timezone
from pathlib import Path

import networkx as nx
import numpy as np

COUNTRIES = [  # report order
    "Algeria", "Libya", "Morocco", "Tunisia", "Bahrain", "Iraq", "Kuwait", "Oman", "Qatar",
    "Saudi Arabia", "UAE", "Egypt", "Sudan", "Jordan", "Lebanon", "Palestine", "Syria", "Yemen",
]
SUPPORT = [170, 169, 178, 154, 184, 178, 190, 169, 198, 199, 192, 200, 188, 180, 194, 173, 194, 193]
TP = [72, 123, 113, 83, 53, 110, 81, 87, 68, 88, 101, 170, 127, 84, 134, 74, 60, 48]
FP = [42, 148, 33, 48, 107, 50, 134, 102, 118, 132, 174, 93, 12, 183, 79, 85, 47, 40]

# Dialects whose false positives were all judged, with the number judged valid.
INCORRECT_FP = {
    "Algeria": 17, "Egypt": 69, "Lebanon": 41, "Palestine": 59,
    "Saudi Arabia": 97, "Sudan": 5, "Syria": 37,
}

REGION = {
    "Algeria": "maghreb", "Libya": "maghreb", "Morocco": "maghreb", "Tunisia": "maghreb",
    "Bahrain": "gulf", "Iraq": "gulf", "Kuwait": "gulf", "Oman": "gulf", "Qatar": "gulf",
    "Saudi Arabia": "gulf", "UAE": "gulf", "Yemen": "gulf",
    "Egypt": "nile", "Sudan": "nile",
    "Jordan": "levant", "Lebanon": "levant", "Palestine": "levant", "Syria": "levant",
}

# (valid label = prediction, sentence, original label)
KNOWN_VALID_FPS = [
    ("Algeria", "عيشك يبارك فيك و يخليك", "Tunisia"),
    ("Algeria", "الله يرحمه ربي معك خويا و انا لله و انا اليه راجعون", "Morocco"),
    ("Egypt", "يلعن الكورة واليوم اللي شجعت في كورة .", "Palestine"),
    ("Egypt", "مرتضي صوتوا ضعيف مع كامل إحترامي مايتقارنش بنسيم مجرد مقارنة", "Tunisia"),
    ("Lebanon", "حالتنا أهون من حالات كتير في الحاضر و في التاريخ . . و غيرنا كتير نجحوا .", "Egypt"),
    ("Lebanon", "هههههه مين قلك أعصابي تعبانة", "Syria"),
    ("Palestine", "بما أنو آخر شهر يا ربي يكونو عاملين خصم عالفلافل", "Lebanon"),
    ("Palestine", "المشكلة انه فيه ناس ماعندهم عقل عشان تعطيهم على قد عقلهم", "Kuwait"),
    ("Saudi Arabia", "والله ماعرف عنه بس جتني الصوره على الخاص وقلت اكيد تذكرونه", "Iraq"),
    ("Saudi Arabia", "اقرا تغريدتي بالكامل وتقرا تغريدة كساب العتيبي وتعال اسال عنها وراح اجيبك", "Qatar"),
    ("Sudan", "ههههههههه انت رجعتي في كلامك سمحتي سمحتي", "Tunisia"),
    ("Sudan", "والله يا استاذ عوض دي عربيه", "Egypt"),
    ("Syria", "هلق الاستعمار فرض علينا بس الاستحمار نحنا فينا نعمله او ما نعمله", "Lebanon"),
    ("Syria", "لاابدا ناس عندهم مبدا", "Iraq"),
]

WORDS = (
    "والله يا جماعة الخير اليوم بكرة امبارح كيفك شلونك ازيك شو شنو ايش وش ليش ليه علاش "
    "هلا مرحبا اهلا حبيبي خويا صاحبي الناس البلد الدنيا الشغل البيت السوق الجامعة المدرسة "
    "الكورة المباراة الفريق الحكومة الوزير الشعب الحياة الصبر الفرح الزعل الضحك الأكل القهوة "
    "الشاي العيد رمضان الجمعة الصيف الشتا المطر الحر البرد الطريق الزحمة السيارة الباص التلفون "
    "النت التغريدة الصورة الفيديو الخبر الموضوع الكلام السؤال الجواب مش مو ماشي ماكو كاين "
    "بدي ابغى عايز حاب نحب يحب تحب اكيد يمكن بس لسه توا هسا هلق دابا برشا كتير وايد بزاف "
    "حلو زين مليح باهي كويس تمام خلاص يلا طيب ربي يخليك يرحمه يستر الحمدلله ماشاءالله "
    "انا انت انتي هو هي احنا حنا نحنا انتو هم عندي عندك عندنا معي معك معنا فيه فيها كل "
    "شي حاجة شوية واجد مرة دايما ابدا كمان برضو زي مثل قد على في من الى عن مع لين لحد"
).split()


def normalize(text):
    out = []
    for ch in text:
        cat = unicodedata.category(ch)
        if cat == "Lo" and 0x0600 <= ord(ch) <= 0x06FF and ch != "ـ":
            out.append(ch)
        elif ch.isspace():
            out.append(" ")
    return " ".join("".join(out).split())


class SentenceMaker:
    def __init__(self, rng, reserved):
        self.rng = rng
        self.seen = {normalize(s) for s in reserved}

    def __call__(self):
        while True:
            words = self.rng.choices(WORDS, k=self.rng.randint(4, 11))
            text = " ".join(words)
            key = normalize(text)
            if key in self.seen:
                continue
            self.seen.add(key)
            roll = self.rng.random()
            if roll < 0.12:
                text += " ؟"
            elif roll < 0.22:
                text += "!!"
            elif roll < 0.30:
                text = "@user " + text
            elif roll < 0.36:
                text += " #" + self.rng.choice(WORDS)
            elif roll < 0.40:
                text += " " + str(self.rng.randint(2, 2024))
            elif roll < 0.44:
                text += " https://t.co/x" + str(self.rng.randint(100, 999))
            return text


def off_diagonal_counts(seeded_cells):
    """Integer matrix with zero diagonal, row sums = FN and column sums = FP.

    Starts from an iterative-proportional fit of a region-affinity prior,
    then rounds with a unit-capacity min-cost flow so every cell moves by
    less than one from the fitted value."""
    n = len(COUNTRIES)
    fn = np.array([s - t for s, t in zip(SUPPORT, TP)], dtype=float)
    fp = np.array(FP, dtype=float)
    assert fn.sum() == fp.sum()
    floor_cells = np.zeros((n, n))
    for g, p in seeded_cells:
        floor_cells[g, p] += 1
    rows = fn - floor_cells.sum(axis=1)
    cols = fp - floor_cells.sum(axis=0)

    prior = np.ones((n, n))
    for g in range(n):
        for p in range(n):
            if g == p:
                prior[g, p] = 0.0
            elif REGION[COUNTRIES[g]] == REGION[COUNTRIES[p]]:
                prior[g, p] = 4.0
    x = prior.copy()
    for _ in range(5000):
        x *= (rows / x.sum(axis=1))[:, None]
        x *= (cols / x.sum(axis=0))[None, :]
    base = np.floor(x)
    frac = x - base
    row_rem = (rows - base.sum(axis=1)).round().astype(int)
    col_rem = (cols - base.sum(axis=0)).round().astype(int)

    graph = nx.DiGraph()
    for g in range(n):
        graph.add_edge("s", f"r{g}", capacity=int(row_rem[g]), weight=0)
        graph.add_edge(f"c{g}", "t", capacity=int(col_rem[g]), weight=0)
        for p in range(n):
            if g != p:
                graph.add_edge(f"r{g}", f"c{p}", capacity=1, weight=int(1000 * (1 - frac[g, p])))
    flow = nx.max_flow_min_cost(graph, "s", "t")
    out = base.astype(int) + floor_cells.astype(int)
    for g in range(n):
        for p in range(n):
            if g != p:
                out[g, p] += flow[f"r{g}"].get(f"c{p}", 0)
    assert (out.sum(axis=1) == fn).all() and (out.sum(axis=0) == fp).all()
    assert all(out[i, i] == 0 for i in range(n))
    return out


def write_tsv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\t".join(header) + "\n")
        for row in rows:
            f.write("\t".join(str(c) for c in row) + "\n")


def make_qadi(out_dir, rng):
    idx = {c: i for i, c in enumerate(COUNTRIES)}
    seeded = [(idx[gold], idx[pred]) for pred, _, gold in KNOWN_VALID_FPS]
    matrix = off_diagonal_counts(seeded)
    make = SentenceMaker(rng, [s for _, s, _ in KNOWN_VALID_FPS])

    samples = []  # (sentence, gold, pred, seeded)
    for pred, sentence, gold in KNOWN_VALID_FPS:
        samples.append((sentence, gold, pred, True))
    remaining = matrix.copy()
    for g, p in seeded:
        remaining[g, p] -= 1
    for g, gold in enumerate(COUNTRIES):
        for _ in range(TP[g]):
            samples.append((make(), gold, gold, False))
        for p, pred in enumerate(COUNTRIES):
            for _ in range(remaining[g, p]):
                samples.append((make(), gold, pred, False))
    rng.shuffle(samples)
    ids = [f"qadi-{i:05d}" for i in range(1, len(samples) + 1)]

    write_tsv(out_dir / "gold.tsv", ["id", "sentence", "label"],
              [(i, s[0], s[1]) for i, s in zip(ids, samples)])
    write_tsv(out_dir / "pred.tsv", ["id", "prediction"], [(i, s[2]) for i, s in zip(ids, samples)])

    # Judge every FP of the validated dialects; seeded examples are valid.
    judgments = []
    start = datetime(2023, 6, 5, 9, 0, 0, tzinfo=timezone.utc)
    for dialect, n_valid in INCORRECT_FP.items():
        fps = [(i, s) for i, s in zip(ids, samples) if s[2] == dialect and s[1] != dialect]
        fixed = [fp for fp in fps if fp[1][3]]
        others = [fp for fp in fps if not fp[1][3]]
        # Same-region confusions are more often valid.
        others.sort(key=lambda fp: (REGION[fp[1][1]] != REGION[dialect], rng.random()))
        valid_ids = {fp[0] for fp in fixed + others[: n_valid - len(fixed)]}
        assert len(valid_ids) == n_valid
        annotator = "ann-" + dialect.lower().replace(" ", "-")
        t = start + timedelta(minutes=rng.randint(0, 300))
        order = fps[:]
        rng.shuffle(order)
        for sample_id, _ in order:
            t += timedelta(seconds=rng.randint(8, 90))
            if sample_id in valid_ids:
                verdict = "valid"
            else:
                verdict = "unsure" if rng.random() < 0.15 else "invalid"
            judgments.append((t, {"sample_id": sample_id, "annotator_id": annotator, "dialect": dialect,
                                  "verdict": verdict, "timestamp": t.strftime("%Y-%m-%dT%H:%M:%SZ")}))
    judgments.sort(key=lambda j: (j[0], j[1]["annotator_id"]))
    with open(out_dir / "judgments.jsonl", "w", encoding="utf-8", newline="\n") as f:
        f.write("# judgments v1: sample_id annotator_id dialect verdict timestamp\n")
        for _, rec in judgments:
            f.write(json.dumps(rec, ensure_ascii=False, separators=(",", ":")) + "\n")

    write_tsv(out_dir / "annotators.tsv", ["annotator_id", "token", "dialect"],
              [("ann-" + d.lower().replace(" ", "-"), f"token-{k:02d}", d)
               for k, d in enumerate(INCORRECT_FP, start=1)])


def make_dialect_counts(path):
    fn = {c: s - t for c, s, t in zip(COUNTRIES, SUPPORT, TP)}
    tp = dict(zip(COUNTRIES, TP))
    fp = dict(zip(COUNTRIES, FP))
    write_tsv(path, ["dialect", "tp", "fp", "fn", "incorrect_fp"],
              [(d, tp[d], fp[d], fn[d], INCORRECT_FP[d]) for d in INCORRECT_FP])


def make_parallel_sample(path):
    countries = ["Algeria", "Egypt", "Iraq", "Jordan", "Lebanon", "Libya", "Morocco", "Oman",
                 "Palestine", "Qatar", "Saudi Arabia", "Sudan", "Syria", "Tunisia", "Yemen"]
    station = "وين المحطة؟"
    station_shared = {"Iraq", "Jordan", "Lebanon", "Libya", "Oman", "Palestine", "Qatar",
                      "Saudi Arabia", "Sudan", "Syria", "Tunisia", "Yemen"}
    station_other = {"Algeria": "وين راهي المحطة؟", "Egypt": "فين المحطة؟", "Morocco": "فين كاينة المحطة؟"}
    flight = "شنو رقم الرحلة؟"
    flight_shared = {"Iraq", "Morocco", "Qatar"}
    flight_other = {
        "Algeria": "واش هو رقم الرحلة؟", "Egypt": "رقم الرحلة كام؟", "Jordan": "شو رقم الرحلة؟",
        "Lebanon": "شو رقم الرحلة يا؟", "Libya": "شن رقم الرحلة؟", "Oman": "ايش رقم الرحلة؟",
        "Palestine": "شو هو رقم الرحلة؟", "Saudi Arabia": "وش رقم الرحلة؟", "Sudan": "رقم الرحلة شنو؟",
        "Syria": "شو رقم الرحلة هلق؟", "Tunisia": "شنية نمرة الرحلة؟", "Yemen": "ايش هو رقم الرحلة؟",
    }
    rows = [
        ["t1-station"] + [station if c in station_shared else station_other[c] for c in countries],
        ["t1-flight"] + [flight if c in flight_shared else flight_other[c] for c in countries],
    ]
    write_tsv(path, ["id"] + countries, rows)


def make_city_parallel(path):
    # MADAR-style wide file at city level; Aleppo and Damascus map to Syria.
    header = ["sentID.BTEC", "split", "English", "Aleppo", "Damascus", "Cairo", "Tunis", "MSA"]
    rows = [
        ["1", "corpus-6-test", "Where is the station?", "وين المحطة؟", "وين المحطة؟", "فين المحطة؟",
         "وين المحطة؟", "أين المحطة؟"],
        ["2", "corpus-6-test", "I want a ticket.", "بدي تذكرة", "بدي بطاقة", "عايز تذكرة", "نحب تيكية",
         "أريد تذكرة"],
        ["3", "corpus-6-test", "Thank you!", "!!!", "شكرا", "شكرا", "يعيشك", "شكرا"],
    ]
    write_tsv(path, header, rows)


def make_synthetic(path, rng):
    # 30 sentences in one dialect each and 10 shared by two: Perc_1 = 60, Perc_2 = 40.
    labels = ["Egypt", "Jordan", "Morocco", "Sudan", "Syria"]
    make = SentenceMaker(rng, [])
    rows = []
    n = 0
    for _ in range(30):
        n += 1
        rows.append((f"syn-{n:03d}", make(), rng.choice(labels)))
    for _ in range(10):
        sentence = make()
        for label in rng.sample(labels, 2):
            n += 1
            rows.append((f"syn-{n:03d}", sentence, label))
    rng.shuffle(rows)
    write_tsv(path, ["id", "sentence", "label"], rows)


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "fixtures"
    (out / "qadi_sample").mkdir(parents=True, exist_ok=True)
    make_qadi(out / "qadi_sample", random.Random(20230605))
    make_dialect_counts(out / "dialect_counts.tsv")
    make_parallel_sample(out / "parallel_sample.tsv")
    make_city_parallel(out / "madar_cities.tsv")
    make_synthetic(out / "synthetic.tsv", random.Random(7))


if __name__ == "__main__":
    main()
