"""
Driving the environment over the wire
=====================================

The newline-delimited JSON protocol is how out-of-process agents talk to
the simulator. Here both ends live in one script: a Session plays the
environment side and a few hand-built messages play the agent side.
"""

import json

from mcsim.protocol import Session, encode_line

session = Session()

# reset: optional config overrides ride along with the episode seed
reply = json.loads(session.handle_line(encode_line({
    "type": "reset",
    "seed": 11,
    "config": {
        "intervals_per_episode": 3,
        "max_tasks_per_interval": 2,
        "num_participants": 3,
    },
})))
print("observation keys:", sorted(reply))
print("tasks on the wire:", reply["tasks"])

# act: assign the first pending task to participant 0, if there is one
assignments = [[reply["tasks"][0]["id"], [0]]] if reply["tasks"] else []
reply = json.loads(session.handle_line(encode_line({
    "type": "act",
    "assignments": assignments,
})))
print("reward:", reply["reward"], "breakdown:", reply["breakdown"])

# malformed input never kills the session, it answers with an error
reply = json.loads(session.handle_line("{this is not json"))
print("malformed ->", reply["code"], "/", reply["detail"])

# the environment is still live and finishes the episode
done = False
while not done:
    reply = json.loads(session.handle_line('{"type":"act","assignments":[]}'))
    done = reply["done"]
print("episode done at interval", reply["observation"]["interval"])

session.handle_line('{"type":"close"}')

# the same conversation works across processes via
#   mcsim serve --stdio          (pipe one JSON message per line)
#   mcsim serve --listen :9000   (one session per TCP connection)
# and `mcsim run --policy external --endpoint HOST:PORT` drives the
# reverse direction, asking a remote agent to choose each action.
