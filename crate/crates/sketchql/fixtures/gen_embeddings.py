"""Writes embeddings.txt: small synthetic word vectors for the fixture schemas.

Each concept gets an orthogonal center; a word is its center plus seeded
Gaussian noise, so words in one concept are close and unrelated words are
near-orthogonal. Rerun after editing CONCEPTS to regenerate the file.
"""

from pathlib import Path

import numpy as np

DIM = 64
SEED = 20170401
NOISE = 0.15

# concept -> {word: noise scale}
CONCEPTS = {
    "paper": {"paper": NOISE, "publication": NOISE, "article": NOISE, "pid": 0.35},
    "conference": {"conference": NOISE, "venue": NOISE, "meeting": NOISE},
    "author": {"author": NOISE, "writer": NOISE, "researcher": NOISE},
    "write": {"writes": NOISE, "write": NOISE, "wrote": NOISE},
    "domain": {"domain": NOISE, "area": NOISE, "field": NOISE},
    "year": {"year": NOISE, "date": NOISE},
    "name": {"name": NOISE, "called": NOISE},
    "title": {"title": NOISE, "heading": NOISE},
    "homepage": {"homepage": NOISE, "website": NOISE, "url": NOISE},
    "grade": {"grade": NOISE, "score": NOISE, "mark": NOISE, "points": NOISE},
    "student": {"student": NOISE, "pupil": NOISE},
    "course": {"course": NOISE, "class": NOISE, "cname": 0.35},
    "department": {"department": NOISE, "dept": NOISE, "division": NOISE},
    "employee": {"employee": NOISE, "staff": NOISE, "worker": NOISE},
    "salary": {"salary": NOISE, "salaries": NOISE, "pay": NOISE, "wage": NOISE, "income": NOISE},
    "age": {"age": NOISE, "old": NOISE},
    "budget": {"budget": NOISE, "funding": NOISE},
    "city": {"city": NOISE, "cities": NOISE, "location": NOISE, "town": NOISE},
    "project": {"project": NOISE, "initiative": NOISE},
    "hour": {"hour": NOISE, "hours": NOISE},
    "work": {"works": NOISE, "work": NOISE},
}


def main() -> None:
    rng = np.random.default_rng(SEED)
    centers, _ = np.linalg.qr(rng.standard_normal((DIM, len(CONCEPTS))))
    lines = []
    for k, words in enumerate(CONCEPTS.values()):
        for word, scale in words.items():
            vec = centers[:, k] + scale * rng.standard_normal(DIM) / np.sqrt(DIM)
            lines.append(word + " " + " ".join(f"{x:.6f}" for x in vec))
    out = Path(__file__).with_name("embeddings.txt")
    out.write_text(f"{len(lines)} {DIM}\n" + "\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
