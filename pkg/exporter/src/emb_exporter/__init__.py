"""Bridge from pretrained sentence encoders to EMB1 embedding files.

Reads a labeled text corpus (JSONL or CSV), encodes every text to a
fixed-dimension float vector, and writes the binary EMB1 file plus a
sidecar JSON describing the encoder, dimensions, and a content checksum.
"""

from .emb1 import write_emb1
from .encoders import EncoderLoadError, load_encoder
from .exporter import ExportError, ExportJob, export

__version__ = "0.1.0"
