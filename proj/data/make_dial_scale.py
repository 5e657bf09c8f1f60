"""Regenerates the dial-scale design-space files.

dial_scale_space.json  full factorial (15625 designs)
dial_scale_2455.json   seeded subset of 2455 designs standing in for the
                       engineering-feasible set, always containing the three
                       narrow-segment designs
"""
import json
import random

ATTRIBUTES = [
    {"name": "weight_capacity", "unit": "lbs", "levels": ["200", "250", "300", "350", "400"]},
    {"name": "aspect_ratio", "unit": "", "levels": ["6/8", "7/8", "8/8", "8/7", "8/6"]},
    {"name": "platform_area", "unit": "in^2", "levels": ["100", "110", "120", "130", "140"]},
    {"name": "tick_mark_gap", "unit": "in", "levels": ["2/32", "3/32", "4/32", "5/32", "6/32"]},
    {"name": "number_size", "unit": "in", "levels": ["0.75", "1.00", "1.25", "1.50", "1.75"]},
    {"name": "price", "unit": "$", "levels": ["10", "15", "20", "25", "30"]},
]

# Unit cost in dollars: a base plus one term per attribute level. Larger
# capacity, platform and readout cost more; finer tick marks cost more.
COSTS = {
    "base": 3.0,
    "additive": [
        [0.0, 0.8, 1.6, 2.4, 3.2],
        [0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.5, 1.0, 1.5, 2.0],
        [1.5, 1.1, 0.7, 0.3, 0.0],
        [0.0, 0.4, 0.8, 1.2, 1.6],
        [0.0, 0.0, 0.0, 0.0, 0.0],
    ],
}

NARROW = [[2, 2, 2, 3, 2, 3], [2, 2, 2, 3, 2, 4], [1, 1, 4, 1, 0, 0]]


def full_factorial():
    out = [[]]
    for a in ATTRIBUTES:
        out = [d + [i] for d in out for i in range(len(a["levels"]))]
    return out


def space(designs):
    return {
        "schema": {
            "attributes": ATTRIBUTES,
            "price_attribute": 5,
            "price_values": [10, 15, 20, 25, 30],
        },
        "cost_model": COSTS,
        "designs": designs,
        "competitor": "random",
    }


def dump(path, doc):
    with open(path, "w") as f:
        text = json.dumps(doc, indent=2)
        f.write(text + "\n")


if __name__ == "__main__":
    dump("dial_scale_space.json", space("full_factorial"))
    all_designs = full_factorial()
    rng = random.Random(2455)
    rest = [d for d in all_designs if d not in NARROW]
    chosen = sorted(NARROW + rng.sample(rest, 2455 - len(NARROW)))
    doc = space(chosen)
    text = json.dumps(doc, indent=2)
    # One design per line keeps the file diffable.
    lines = ",\n    ".join(json.dumps(d) for d in chosen)
    text = text.split('"designs": [')[0] + '"designs": [\n    ' + lines + '\n  ],\n  "competitor": "random"\n}'
    with open("dial_scale_2455.json", "w") as f:
        f.write(text + "\n")
