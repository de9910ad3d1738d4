"""Conversation and corpus generation."""

from __future__ import annotations

import functools
import random
from concurrent.futures import ThreadPoolExecutor

from ..dialogue import Dialogue, ErrorRecord, Metadata, Utterance
from ..interaction import InteractionModel, model_to_dict
from .agent import AgentState, agent_respond, new_agent, split_composite
from .catalog import Catalog, default_catalog
from .config import DefectProfile, SimulatorConfig, digest
from .nlu import nlu_match_intent
from .user import UserState, new_simulator, simulator_respond

RECURSION_KIND = "RecursionError"


@functools.lru_cache(maxsize=64)
def config_digest(defects: DefectProfile, cfg: SimulatorConfig, model: InteractionModel) -> str:
    return digest(defects, cfg, model_to_dict(model))


def generate_conversation(
    agent: AgentState,
    user: UserState,
    defects: DefectProfile,
    seed: int,
    dialogue_id: str | None = None,
    iteration: str = "",
) -> Dialogue:
    """Alternate agent and user turns until goodbye, a crash, or the turn budget."""
    rng = random.Random(f"{seed}-respond")
    utterances: list[Utterance] = []
    errors: list[ErrorRecord] = []
    user_act = None
    user_text = ""

    while True:
        if len(utterances) >= defects.max_turns:
            errors.append(ErrorRecord(RECURSION_KIND, len(utterances), f"no conclusion after {defects.max_turns} turns"))
            break
        agent, out = agent_respond(agent, user_act, user_text, index=len(utterances))
        if isinstance(out, ErrorRecord):
            errors.append(out)
            break
        utterances.extend(split_composite(out) if defects.split_composites else [out])
        if "A_BYE" in out.intent:
            break
        if len(utterances) >= defects.max_turns:
            errors.append(ErrorRecord(RECURSION_KIND, len(utterances), f"no conclusion after {defects.max_turns} turns"))
            break
        user, reply = simulator_respond(user, out.act, user.cfg, rng, index=len(utterances))
        utterances.append(reply)
        user_text = reply.text
        user_act = nlu_match_intent(user_text, defects, agent.catalog)

    meta = Metadata(
        iteration=iteration,
        seed=seed,
        config_digest=config_digest(defects, user.cfg, user.model),
        agent_profile=defects.tag,
    )
    return Dialogue(dialogue_id or f"dlg-{seed}", tuple(utterances), tuple(errors), meta)


def _one(i: int, defects, sim_cfg, model, catalog, seed, iteration) -> Dialogue:
    s = seed + i
    agent = new_agent(catalog, defects, model)
    user = new_simulator(sim_cfg, model, catalog, s)
    prefix = f"{iteration}-" if iteration else "dlg-"
    return generate_conversation(agent, user, defects, s, f"{prefix}{i:04d}", iteration)


def generate_corpus(
    n: int,
    agent_cfg: DefectProfile,
    sim_cfg: SimulatorConfig,
    model: InteractionModel,
    seed: int,
    workers: int = 1,
    catalog: Catalog | None = None,
    iteration: str = "",
) -> list[Dialogue]:
    """``n`` independent dialogues; dialogue ``i`` uses seed ``seed + i``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    catalog = catalog or default_catalog()
    args = (agent_cfg, sim_cfg, model, catalog, seed, iteration)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda i: _one(i, *args), range(n)))
    return [_one(i, *args) for i in range(n)]
