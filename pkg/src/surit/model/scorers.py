"""Frame-synchronous scorers over trained parameters, consumed by ``surit.decode``."""

import numpy as np

from surit.inventory import SpeakerInventory
from surit.lattice import NodeLogits
from surit.model.network import SID_EMITTED, SID_START, asr_encoder_forward, sid_encoder_forward
from surit.neural import ops
from surit.neural.params import ModelParams


class AsrStreamScorer:
    """Shared ASR transducer on one stream; decoder state is (label-encoder hidden, projected state)."""

    def __init__(self, params: ModelParams, stream: np.ndarray):
        self._params = params
        F, _ = asr_encoder_forward(params, stream)
        self._enc = F @ params["asr.joint.enc.W"] + params["asr.joint.b"]

    @property
    def frames(self) -> int:
        return int(self._enc.shape[0])

    def _step(self, h: np.ndarray, symbol: int) -> tuple[np.ndarray, np.ndarray]:
        p = self._params
        x = p["asr.pred.embed"][symbol]
        h, _ = ops.recurrent_step_forward(x, h, p["asr.pred.gru.W"], p["asr.pred.gru.U"], p["asr.pred.gru.b"])
        return h, h @ p["asr.joint.pred.W"]

    def start(self) -> tuple[np.ndarray, np.ndarray]:
        return self._step(np.zeros(self._params["asr.pred.gru.U"].shape[0]), 0)

    def scores(self, t: int, state: tuple[np.ndarray, np.ndarray]) -> np.ndarray:
        z = np.tanh(self._enc[t] + state[1])
        return z @ self._params["asr.out.W"] + self._params["asr.out.b"]

    def advance(self, state: tuple[np.ndarray, np.ndarray], token: int) -> tuple[np.ndarray, np.ndarray]:
        return self._step(state[0], token + 1)


class SidStreamScorer:
    """HAT node logits of the SID head; label logits are inventory profiles dotted with e."""

    def __init__(self, params: ModelParams, stream: np.ndarray, inventory: SpeakerInventory):
        self._params = params
        self._inventory = inventory
        Fs, _ = sid_encoder_forward(params, stream)
        self._enc = Fs @ params["sid.joint.enc.W"] + params["sid.joint.b"]
        self._pred = params["sid.pred.embed"][[SID_START, SID_EMITTED]] @ params["sid.joint.pred.W"]

    @property
    def frames(self) -> int:
        return int(self._enc.shape[0])

    def node(self, t: int, emitted: bool) -> NodeLogits:
        p = self._params
        z = np.tanh(self._enc[t] + self._pred[int(emitted)])
        blank = float((z @ p["sid.blank.W"] + p["sid.blank.b"])[0])
        e = z @ p["sid.label.W"] + p["sid.label.b"]
        return NodeLogits(blank_logit=blank, label_logits=self._inventory.embeddings @ e)
