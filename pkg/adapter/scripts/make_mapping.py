"""Regenerate the ImageNet -> 12-category mapping JSON offline.

Walks the WordNet hypernym closure of each target synset and maps
every ImageNet-1k class whose synset falls inside a target's closure
to that category. Needs NLTK with the wordnet corpus plus the
torchvision class metadata; the toolkit consumes the committed JSON
and never touches WordNet at runtime.

Usage: python make_mapping.py --out imagenet_to_12.json
"""

import argparse
import json
import sys

TARGET_SYNSETS = {
    "truck": "truck.n.01",
    "cup": "cup.n.01",
    "bowl": "bowl.n.03",
    "binoculars": "binoculars.n.01",
    "glasses": "spectacles.n.01",
    "hat": "hat.n.01",
    "pan": "pan.n.01",
    "sewing machine": "sewing_machine.n.01",
    "shovel": "shovel.n.01",
    "banana": "banana.n.02",
    "boot": "boot.n.01",
    "lamp": "lamp.n.01",
}

# sunglasses are worn like spectacles but sit outside that closure in
# WordNet; the behavioral task treats them as "glasses"
EXTRA_MEMBERS = {"glasses": ["sunglass.n.01", "sunglasses.n.01"]}


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="imagenet_to_12.json")
    args = parser.parse_args()

    try:
        from nltk.corpus import wordnet as wn
        wn.synsets("truck")  # force corpus load
    except Exception as err:
        print(f"error: WordNet corpus unavailable ({err}); run "
              "`python -m nltk.downloader wordnet` first", file=sys.stderr)
        return 1
    from torchvision.models import ResNet18_Weights

    names = ResNet18_Weights.IMAGENET1K_V1.meta["categories"]

    def closure(synset):
        seen = {synset}
        frontier = [synset]
        while frontier:
            current = frontier.pop()
            for child in current.hyponyms() + current.instance_hyponyms():
                if child not in seen:
                    seen.add(child)
                    frontier.append(child)
        return seen

    members = {}
    for label, key in TARGET_SYNSETS.items():
        members[label] = closure(wn.synset(key))
        for extra in EXTRA_MEMBERS.get(label, ()):
            members[label].add(wn.synset(extra))

    mapping = {}
    for index, name in enumerate(names):
        candidates = wn.synsets(name.split(",")[0].replace(" ", "_"), pos="n")
        hit = None
        for label, pool in members.items():
            if any(s in pool for s in candidates):
                hit = label
                break
        mapping[str(index)] = hit

    covered = {v for v in mapping.values() if v}
    missing = set(TARGET_SYNSETS) - covered
    if missing:
        print(f"warning: no ImageNet member found for {sorted(missing)}",
              file=sys.stderr)
    with open(args.out, "w") as fh:
        json.dump(mapping, fh, indent=0)
    print(f"wrote {args.out}: {sum(1 for v in mapping.values() if v)} "
          "mapped classes")
    return 0


if __name__ == "__main__":
    sys.exit(main())
