from dataclasses import astuple, dataclass, field
from typing import List

HISTORY_HEADER = ("epoch", "train_loss", "train_acc", "val_loss", "val_acc", "lr")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    train_acc: float
    val_loss: float
    val_acc: float
    lr: float


@dataclass
class TrainingHistory:
    """Per-epoch training curve of one network fit."""

    records: List[EpochRecord] = field(default_factory=list)

    def append(self, record: EpochRecord):
        if self.records and record.epoch <= self.records[-1].epoch:
            raise ValueError(
                f"Epoch {record.epoch} does not follow epoch {self.records[-1].epoch}"
            )
        self.records.append(record)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def column(self, name: str) -> list:
        return [getattr(record, name) for record in self.records]

    def best_epoch(self) -> int:
        """Epoch with the lowest validation loss, earliest on ties."""
        if not self.records:
            return None
        return min(self.records, key=lambda r: (r.val_loss, r.epoch)).epoch

    def to_rows(self) -> list:
        return [list(astuple(record)) for record in self.records]

    @classmethod
    def from_rows(cls, rows) -> "TrainingHistory":
        history = cls()
        for row in rows:
            epoch, *values = row
            history.append(EpochRecord(int(epoch), *(float(v) for v in values)))
        return history

    def to_dict(self) -> dict:
        return {"header": list(HISTORY_HEADER), "rows": self.to_rows()}
