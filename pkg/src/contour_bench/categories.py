"""The canonical 12-way response set used throughout the toolkit."""

# Fixed order; alphabetical so that argmax tie-breaks resolve to the
# alphabetically first label by index.
CATEGORIES = (
    "banana",
    "binoculars",
    "boot",
    "bowl",
    "cup",
    "glasses",
    "hat",
    "lamp",
    "pan",
    "sewing machine",
    "shovel",
    "truck",
)

CHANCE_ACCURACY = 1.0 / len(CATEGORIES)  # 12-AFC chance, 8.33%


def normalize_category(name: str) -> str:
    """Map a directory-style name ('sewing_machine') to its canonical label."""
    return name.strip().lower().replace("_", " ")


def is_category(name: str) -> bool:
    return normalize_category(name) in CATEGORIES
