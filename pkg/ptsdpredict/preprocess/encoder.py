from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from ptsdpredict.errors import MissingCell, UnseenCategory
from ptsdpredict.tabular.table import MISSING


@dataclass(frozen=True)
class LabelEncoder:
    """Bijection between category text and integer codes 0..k-1.

    Codes follow the lexicographic order of the category text, so the
    encoding does not depend on row order.
    """

    code_to_category: Tuple[str, ...]
    column: str = None

    @property
    def category_to_code(self) -> Dict[str, int]:
        return {category: code for code, category in enumerate(self.code_to_category)}

    @property
    def n_categories(self) -> int:
        return len(self.code_to_category)

    def decode(self, codes) -> list:
        return [self.code_to_category[int(code)] for code in codes]

    def to_dict(self) -> dict:
        return {"column": self.column, "categories": list(self.code_to_category)}

    @classmethod
    def from_dict(cls, document) -> "LabelEncoder":
        return cls(code_to_category=tuple(document["categories"]), column=document.get("column"))


def fit_encoder(column: Sequence, name: str = None) -> LabelEncoder:
    if any(cell is MISSING for cell in column):
        raise MissingCell(name or "<unnamed>")
    return LabelEncoder(code_to_category=tuple(sorted(set(column))), column=name)


def encode(encoder: LabelEncoder, column: Sequence) -> np.ndarray:
    mapping = encoder.category_to_code
    codes = np.empty(len(column), dtype=np.int64)
    for i, cell in enumerate(column):
        try:
            codes[i] = mapping[cell]
        except (KeyError, TypeError):
            raise UnseenCategory(cell, encoder.column)
    return codes
