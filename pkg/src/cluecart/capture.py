"""Scripted stand-in for the in-game capture mod.

A scene script declares objects (characters, locations, UI elements) and a
time-ordered list of steps: camera moves, object moves, hotkey-style
screenshot captures, recording start/stop, achievement unlocks, and text
payload updates. Running the script yields one CaptureEvent per screenshot,
per completed recording, and per achievement unlock, each carrying the
names of the characters and locations visible at that instant.

Screenshots and recordings are metadata-only: paths are placeholders and a
TextPayload stands in for what a vision model would read from pixels.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable

from .errors import MalformedScript, UnbalancedRecording, WrongKind
from .frustum import CameraState, Rect2, Vec3, sphere_in_frustum
from .model import MediaKind, MediaRef


class ObjectKind(str, Enum):
    CHARACTER = "character"
    LOCATION = "location"
    UI_ELEMENT = "ui_element"


@dataclass
class SceneObject:
    name: str
    kind: ObjectKind
    center: Vec3  # world units; screen units for UI elements (z ignored)
    radius: float  # bounding sphere; half-extent for UI element squares


@dataclass(frozen=True)
class TextPayload:
    ocr_text: str = ""
    speaker: str | None = None
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "ocr_text": self.ocr_text,
            "speaker": self.speaker,
            "flags": list(self.flags),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TextPayload":
        return cls(
            ocr_text=d.get("ocr_text", ""),
            speaker=d.get("speaker"),
            flags=tuple(d.get("flags", [])),
        )


class Action(str, Enum):
    SET_CAMERA = "set_camera"
    MOVE_OBJECT = "move_object"
    CAPTURE_SCREENSHOT = "capture_screenshot"
    START_RECORDING = "start_recording"
    STOP_RECORDING = "stop_recording"
    UNLOCK_ACHIEVEMENT = "unlock_achievement"
    SET_PAYLOAD = "set_payload"


@dataclass
class Step:
    t_ms: int
    action: Action
    camera: CameraState | None = None
    name: str | None = None  # object or achievement name
    center: Vec3 | None = None
    payload: TextPayload | None = None


@dataclass
class SceneScript:
    game_name: str
    objects: list[SceneObject]
    steps: list[Step]

    def validate(self) -> None:
        names = [o.name for o in self.objects]
        if len(names) != len(set(names)):
            raise MalformedScript("object names must be unique")
        for o in self.objects:
            if o.radius <= 0:
                raise MalformedScript(f"object {o.name!r} needs radius > 0")
        last_t = None
        for s in self.steps:
            if last_t is not None and s.t_ms < last_t:
                raise MalformedScript("steps must be ordered by time")
            last_t = s.t_ms


@dataclass
class CaptureEvent:
    id: str
    timestamp_ms: int
    media: MediaRef
    detected_characters: list[str] = field(default_factory=list)
    detected_locations: list[str] = field(default_factory=list)
    achievement: str | None = None
    payload: TextPayload = field(default_factory=TextPayload)

    def to_dict(self) -> dict:
        # Field order here is the capture-log wire format; keep it fixed.
        return {
            "id": self.id,
            "timestamp_ms": self.timestamp_ms,
            "media": {"kind": self.media.kind.value, "path": self.media.path},
            "detected_characters": list(self.detected_characters),
            "detected_locations": list(self.detected_locations),
            "achievement": self.achievement,
            "payload": self.payload.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CaptureEvent":
        return cls(
            id=d["id"],
            timestamp_ms=d["timestamp_ms"],
            media=MediaRef(MediaKind(d["media"]["kind"]), d["media"]["path"]),
            detected_characters=list(d["detected_characters"]),
            detected_locations=list(d["detected_locations"]),
            achievement=d.get("achievement"),
            payload=TextPayload.from_dict(d.get("payload", {})),
        )


def ui_in_rect(camera: CameraState, obj: SceneObject) -> bool:
    """Closed-interval overlap between a UI square and the camera's UI rect."""
    if obj.kind is not ObjectKind.UI_ELEMENT:
        raise WrongKind(f"{obj.name!r} is {obj.kind.value}, not a UI element")
    return camera.ui_rect.overlaps_square(obj.center[0], obj.center[1], obj.radius)


class _SceneState:
    """Mutable world state threaded through script execution."""

    def __init__(self, script: SceneScript):
        self.camera: CameraState | None = None
        self.positions = {o.name: o.center for o in script.objects}
        self.objects = {o.name: o for o in script.objects}
        self.payload = TextPayload()

    def visible_names(self, kind: ObjectKind) -> list[str]:
        if self.camera is None:
            return []
        out = []
        for obj in self.objects.values():
            if obj.kind is not kind:
                continue
            if sphere_in_frustum(self.camera, self.positions[obj.name], obj.radius):
                out.append(obj.name)
        return out

    def visible_ui(self) -> list[str]:
        if self.camera is None:
            return []
        return [
            o.name
            for o in self.objects.values()
            if o.kind is ObjectKind.UI_ELEMENT and ui_in_rect(self.camera, o)
        ]


def run_script(script: SceneScript) -> list[CaptureEvent]:
    """Execute a scene script and emit capture events in timestamp order.

    Recordings sample visibility at every script step between start and
    stop and report the deduplicated union (first-seen order); their event
    timestamp is the stop time.
    """
    script.validate()
    state = _SceneState(script)
    events: list[CaptureEvent] = []
    seq = 0

    recording_start: int | None = None
    rec_characters: dict[str, None] = {}
    rec_locations: dict[str, None] = {}

    def next_id() -> str:
        nonlocal seq
        seq += 1
        return f"ev-{seq:04d}"

    def sample_recording() -> None:
        for n in state.visible_names(ObjectKind.CHARACTER):
            rec_characters.setdefault(n)
        for n in state.visible_names(ObjectKind.LOCATION):
            rec_locations.setdefault(n)

    for step in script.steps:
        if step.action is Action.SET_CAMERA:
            state.camera = step.camera
        elif step.action is Action.MOVE_OBJECT:
            if step.name not in state.positions:
                raise MalformedScript(f"move_object: unknown object {step.name!r}")
            state.positions[step.name] = step.center
        elif step.action is Action.SET_PAYLOAD:
            state.payload = step.payload or TextPayload()
        elif step.action is Action.CAPTURE_SCREENSHOT:
            eid = next_id()
            events.append(
                CaptureEvent(
                    id=eid,
                    timestamp_ms=step.t_ms,
                    media=MediaRef(MediaKind.SCREENSHOT, f"screenshots/{eid}.png"),
                    detected_characters=state.visible_names(ObjectKind.CHARACTER),
                    detected_locations=state.visible_names(ObjectKind.LOCATION),
                    payload=state.payload,
                )
            )
        elif step.action is Action.START_RECORDING:
            if recording_start is not None:
                raise UnbalancedRecording("start_recording while already recording")
            recording_start = step.t_ms
            rec_characters, rec_locations = {}, {}
        elif step.action is Action.STOP_RECORDING:
            if recording_start is None:
                raise UnbalancedRecording("stop_recording without start_recording")
            sample_recording()
            eid = next_id()
            events.append(
                CaptureEvent(
                    id=eid,
                    timestamp_ms=step.t_ms,
                    media=MediaRef(MediaKind.RECORDING, f"recordings/{eid}.mp4"),
                    detected_characters=list(rec_characters),
                    detected_locations=list(rec_locations),
                    payload=state.payload,
                )
            )
            recording_start = None
        elif step.action is Action.UNLOCK_ACHIEVEMENT:
            eid = next_id()
            events.append(
                CaptureEvent(
                    id=eid,
                    timestamp_ms=step.t_ms,
                    media=MediaRef(MediaKind.SCREENSHOT, f"screenshots/{eid}.png"),
                    detected_characters=state.visible_names(ObjectKind.CHARACTER),
                    detected_locations=state.visible_names(ObjectKind.LOCATION),
                    achievement=step.name,
                    payload=state.payload,
                )
            )
        if recording_start is not None:
            sample_recording()

    if recording_start is not None:
        raise UnbalancedRecording("recording still open at end of script")
    return events


# -- capture log I/O ----------------------------------------------------------

def event_to_json(event: CaptureEvent) -> str:
    return json.dumps(event.to_dict(), ensure_ascii=False, separators=(",", ":"))


def write_capture_log(events: Iterable[CaptureEvent], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for event in events:
            f.write(event_to_json(event) + "\n")


def iter_capture_log(text: str) -> Iterable[tuple[int, CaptureEvent]]:
    """Yield (line_no, event) pairs; raises ValueError with context on bad lines."""
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            yield line_no, CaptureEvent.from_dict(json.loads(line))
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise ValueError(f"line {line_no}: {exc}") from exc


def read_capture_log(path: str | Path) -> list[CaptureEvent]:
    text = Path(path).read_text(encoding="utf-8")
    return [event for _, event in iter_capture_log(text)]


# -- scene script JSON --------------------------------------------------------

def _vec3(value, what: str) -> Vec3:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise MalformedScript(f"{what} must be a 3-vector")
    return (float(value[0]), float(value[1]), float(value[2]))


def camera_from_dict(d: dict) -> CameraState:
    try:
        rect = d["ui_rect"]
        return CameraState(
            position=_vec3(d["position"], "camera position"),
            forward=_vec3(d["forward"], "camera forward"),
            up=_vec3(d["up"], "camera up"),
            vfov_deg=float(d["vfov_deg"]),
            aspect=float(d["aspect"]),
            near=float(d["near"]),
            far=float(d["far"]),
            ui_rect=Rect2(float(rect[0]), float(rect[1]), float(rect[2]), float(rect[3])),
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise MalformedScript(f"bad camera: {exc}") from exc


def camera_to_dict(cam: CameraState) -> dict:
    return {
        "position": list(cam.position),
        "forward": list(cam.forward),
        "up": list(cam.up),
        "vfov_deg": cam.vfov_deg,
        "aspect": cam.aspect,
        "near": cam.near,
        "far": cam.far,
        "ui_rect": [cam.ui_rect.x0, cam.ui_rect.y0, cam.ui_rect.x1, cam.ui_rect.y1],
    }


def script_from_dict(d: dict) -> SceneScript:
    try:
        objects = [
            SceneObject(
                name=o["name"],
                kind=ObjectKind(o["kind"]),
                center=_vec3(o["center"], f"object {o.get('name')!r} center"),
                radius=float(o["radius"]),
            )
            for o in d.get("objects", [])
        ]
        steps = []
        for s in d.get("steps", []):
            action = Action(s["action"])
            step = Step(t_ms=int(s["t_ms"]), action=action)
            if action is Action.SET_CAMERA:
                step.camera = camera_from_dict(s["camera"])
            elif action is Action.MOVE_OBJECT:
                step.name = s["name"]
                step.center = _vec3(s["center"], "move_object center")
            elif action is Action.UNLOCK_ACHIEVEMENT:
                step.name = s["name"]
            elif action is Action.SET_PAYLOAD:
                step.payload = TextPayload.from_dict(s["payload"])
            steps.append(step)
        script = SceneScript(
            game_name=d.get("game_name", ""), objects=objects, steps=steps
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedScript(str(exc)) from exc
    script.validate()
    return script


def load_script(path: str | Path) -> SceneScript:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedScript(f"script is not valid JSON: {exc}") from exc
    return script_from_dict(data)
