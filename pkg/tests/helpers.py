from devmine.log_model import ActivityDictionary, ClassLabel, Event, EventLog, Trace


def make_log(sequences, labels=None, names="abcdefghijklmnopqrstuvwxyz"):
    """Log over single-letter activities; ``sequences`` are strings or lists of letters."""
    acts = ActivityDictionary(names)
    traces = []
    for i, seq in enumerate(sequences):
        label = None
        if labels is not None:
            label = ClassLabel.DEVIANT if labels[i] in (1, True, "deviant") else ClassLabel.NORMAL
        traces.append(Trace(f"c{i}", tuple(Event(acts.id_of(s)) for s in seq), label))
    return EventLog(tuple(traces), acts)


def int_log(sequences, labels=None):
    """Log whose activity ids are the given integers (alphabet up to 26)."""
    letters = "abcdefghijklmnopqrstuvwxyz"
    return make_log(["".join(letters[s] for s in seq) for seq in sequences], labels)


def ids(log, text):
    return tuple(log.activities.id_of(c) for c in text)
