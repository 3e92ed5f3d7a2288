"""Interactive steering service.

One simulation loop owns all mutable state. Connection handlers talk to it
only through a command queue (in) and a frame broadcast (out), so commands
apply between simulation steps, never mid-step.

Wire format, both transports: one UTF-8 JSON object per LF-terminated line.
Client lines are commands (field "cmd"); server lines are state frames
(field "type") or error notices. The lattice travels run-length encoded as
comma-separated "<count>x<digit>" tokens, row-major.

Transports: plain TCP, or a WebSocket upgrade for browser clients. The two
are distinguished by sniffing the first bytes of the connection ("GET "
starts an HTTP handshake).
"""

from __future__ import annotations

import base64
import hashlib
import json
import math
import queue
import socket
import struct
import threading
import time
from dataclasses import dataclass
from typing import Union

import numpy as np

from .engine import SimConfig, Simulation, TrajectoryRecord
from .rules import parse_rule

WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

MIN_STEPS_PER_SECOND = 1
MAX_STEPS_PER_SECOND = 1000


class CommandDecodeError(ValueError):
    """Line was not a well-formed client command."""


@dataclass(frozen=True)
class SetLight:
    x: float
    y: float


@dataclass(frozen=True)
class Pause:
    pass


@dataclass(frozen=True)
class Resume:
    pass


@dataclass(frozen=True)
class Reset:
    seed: int


@dataclass(frozen=True)
class SetRule:
    code: str


@dataclass(frozen=True)
class SetSpeed:
    steps_per_second: int


ClientCommand = Union[SetLight, Pause, Resume, Reset, SetRule, SetSpeed]


@dataclass(frozen=True)
class StateFrame:
    step: int
    x: float
    y: float
    heading: float
    light_x: float
    light_y: float
    excited: int
    dist: float
    width: int
    height: int
    grid: str  # RLE of row-major state digits


def rle_encode(states) -> str:
    """Row-major run-length encoding: "<count>x<digit>" tokens, commas between.

    `states` is any array-like of digits; a 2-D grid is flattened row-major.
    """
    flat = np.ascontiguousarray(states, dtype=np.uint8).reshape(-1)
    if flat.size == 0:
        return ""
    breaks = np.flatnonzero(flat[1:] != flat[:-1])
    starts = np.concatenate(([0], breaks + 1))
    ends = np.concatenate((breaks + 1, [flat.size]))
    return ",".join(f"{e - s}x{flat[s]}" for s, e in zip(starts, ends))


def rle_decode(text: str) -> np.ndarray:
    """Inverse of rle_encode; returns a flat uint8 array of state digits."""
    if text == "":
        return np.zeros(0, dtype=np.uint8)
    counts = []
    digits = []
    for token in text.split(","):
        count_s, sep, digit_s = token.partition("x")
        if sep != "x" or not count_s.isdigit() or not digit_s.isdigit():
            raise ValueError(f"bad RLE token {token!r}")
        count = int(count_s)
        digit = int(digit_s)
        if count < 1 or digit > 2:
            raise ValueError(f"bad RLE token {token!r}: count >= 1, digit in 0..2")
        counts.append(count)
        digits.append(digit)
    return np.repeat(np.array(digits, dtype=np.uint8), counts)


def encode_frame(frame: StateFrame) -> bytes:
    """One LF-terminated JSON line; floats serialize via repr, so they round-trip."""
    payload = {
        "type": "state",
        "step": frame.step,
        "x": frame.x,
        "y": frame.y,
        "heading": frame.heading,
        "light_x": frame.light_x,
        "light_y": frame.light_y,
        "excited": frame.excited,
        "dist": frame.dist,
        "width": frame.width,
        "height": frame.height,
        "grid": frame.grid,
    }
    return (json.dumps(payload, separators=(",", ":")) + "\n").encode("utf-8")


def decode_frame(data: bytes) -> StateFrame:
    """Parse one encode_frame line back into a StateFrame (used by tests/tools)."""
    try:
        obj = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValueError(f"bad frame line: {exc}") from exc
    if not isinstance(obj, dict) or obj.get("type") != "state":
        raise ValueError("frame line must be an object with type 'state'")
    try:
        frame = StateFrame(
            step=int(obj["step"]),
            x=float(obj["x"]), y=float(obj["y"]), heading=float(obj["heading"]),
            light_x=float(obj["light_x"]), light_y=float(obj["light_y"]),
            excited=int(obj["excited"]), dist=float(obj["dist"]),
            width=int(obj["width"]), height=int(obj["height"]),
            grid=str(obj["grid"]),
        )
    except KeyError as exc:
        raise ValueError(f"frame missing field {exc.args[0]!r}") from exc
    if rle_decode(frame.grid).size != frame.width * frame.height:
        raise ValueError("grid RLE does not decode to width*height digits")
    return frame


def decode_command(data: bytes) -> ClientCommand:
    """Parse one client line. Raises CommandDecodeError on any malformed input."""
    try:
        obj = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CommandDecodeError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict) or "cmd" not in obj:
        raise CommandDecodeError("command must be a JSON object with a 'cmd' field")
    cmd = obj["cmd"]
    try:
        if cmd == "set_light":
            x = float(obj["x"])
            y = float(obj["y"])
            if not (math.isfinite(x) and math.isfinite(y)):
                raise CommandDecodeError("set_light coordinates must be finite")
            return SetLight(x, y)
        if cmd == "pause":
            return Pause()
        if cmd == "resume":
            return Resume()
        if cmd == "reset":
            return Reset(int(obj["seed"]))
        if cmd == "set_rule":
            code = str(obj["code"])
            parse_rule(code)
            return SetRule(code)
        if cmd == "set_speed":
            sps = int(obj["steps_per_second"])
            if not MIN_STEPS_PER_SECOND <= sps <= MAX_STEPS_PER_SECOND:
                raise CommandDecodeError(
                    f"steps_per_second must be in "
                    f"{MIN_STEPS_PER_SECOND}..{MAX_STEPS_PER_SECOND}, got {sps}")
            return SetSpeed(sps)
    except CommandDecodeError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CommandDecodeError(f"bad arguments for {cmd!r}: {exc}") from exc
    raise CommandDecodeError(f"unknown cmd {cmd!r}")


class SteeringSimulation:
    """A simulation plus the steering controls; no sockets, unit-testable.

    The server drives it with apply()/advance()/make_frame(); tests can do
    the same without any transport.
    """

    def __init__(self, cfg: SimConfig, steps_per_second: int = 200):
        if not MIN_STEPS_PER_SECOND <= steps_per_second <= MAX_STEPS_PER_SECOND:
            raise ValueError("steps_per_second out of range")
        self.sim = Simulation(cfg)
        self.paused = False
        self.steps_per_second = steps_per_second

    def apply(self, command: ClientCommand) -> None:
        """Apply one command atomically between steps."""
        if isinstance(command, SetLight):
            self.sim.set_light(command.x, command.y)
        elif isinstance(command, Pause):
            self.paused = True
        elif isinstance(command, Resume):
            self.paused = False
        elif isinstance(command, Reset):
            self.sim.reset(command.seed)
        elif isinstance(command, SetRule):
            self.sim.set_rule(command.code)
        elif isinstance(command, SetSpeed):
            self.steps_per_second = command.steps_per_second
        else:
            raise TypeError(f"not a ClientCommand: {command!r}")

    def advance(self, steps: int) -> None:
        """Run up to `steps` simulation steps; a paused simulation holds still."""
        if self.paused:
            return
        for _ in range(steps):
            self.sim.step()

    def make_frame(self) -> StateFrame:
        sim = self.sim
        rec: TrajectoryRecord = sim.record()
        return StateFrame(
            step=rec.step, x=rec.x, y=rec.y, heading=rec.heading,
            light_x=sim.light.position.x, light_y=sim.light.position.y,
            excited=rec.excited, dist=rec.dist,
            width=sim.cfg.width, height=sim.cfg.height,
            grid=rle_encode(sim.lattice.grid),
        )


class _Client:
    """One connected peer: either a raw line socket or a WebSocket."""

    def __init__(self, sock: socket.socket, is_websocket: bool):
        self.sock = sock
        self.is_websocket = is_websocket
        self.send_lock = threading.Lock()
        self.alive = True

    def send_line(self, line: bytes) -> None:
        with self.send_lock:
            if self.is_websocket:
                self.sock.sendall(_ws_text_frame(line))
            else:
                self.sock.sendall(line)

    def close(self) -> None:
        self.alive = False
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self.sock.close()


def _ws_text_frame(payload: bytes) -> bytes:
    """Server-to-client text frame: FIN set, unmasked, 7/16/64-bit lengths."""
    n = len(payload)
    if n < 126:
        header = struct.pack("!BB", 0x81, n)
    elif n < 1 << 16:
        header = struct.pack("!BBH", 0x81, 126, n)
    else:
        header = struct.pack("!BBQ", 0x81, 127, n)
    return header + payload


def _ws_control_frame(opcode: int, payload: bytes = b"") -> bytes:
    return struct.pack("!BB", 0x80 | opcode, len(payload)) + payload


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise ConnectionError("peer closed mid-frame")
        buf.extend(chunk)
    return bytes(buf)


def _ws_handshake(sock: socket.socket, first: bytes) -> None:
    """Read the HTTP upgrade request (first bytes already consumed) and accept."""
    data = bytearray(first)
    while b"\r\n\r\n" not in data:
        chunk = sock.recv(4096)
        if not chunk:
            raise ConnectionError("peer closed during handshake")
        data.extend(chunk)
        if len(data) > 65536:
            raise ConnectionError("oversized handshake request")
    head = bytes(data).split(b"\r\n\r\n", 1)[0].decode("latin-1")
    key = None
    for line in head.split("\r\n")[1:]:
        name, sep, value = line.partition(":")
        if sep and name.strip().lower() == "sec-websocket-key":
            key = value.strip()
    if key is None:
        sock.sendall(b"HTTP/1.1 400 Bad Request\r\n\r\n")
        raise ConnectionError("upgrade request without Sec-WebSocket-Key")
    accept = base64.b64encode(
        hashlib.sha1((key + WS_GUID).encode("ascii")).digest()).decode("ascii")
    sock.sendall(
        ("HTTP/1.1 101 Switching Protocols\r\n"
         "Upgrade: websocket\r\n"
         "Connection: Upgrade\r\n"
         f"Sec-WebSocket-Accept: {accept}\r\n\r\n").encode("ascii"))


def _ws_read_message(client: _Client) -> bytes | None:
    """Next complete text message's payload, or None once the peer closes.

    Handles continuation, replies to pings, answers close with close.
    """
    sock = client.sock
    message = bytearray()
    while True:
        b0, b1 = _recv_exact(sock, 2)
        fin = bool(b0 & 0x80)
        opcode = b0 & 0x0F
        masked = bool(b1 & 0x80)
        length = b1 & 0x7F
        if length == 126:
            (length,) = struct.unpack("!H", _recv_exact(sock, 2))
        elif length == 127:
            (length,) = struct.unpack("!Q", _recv_exact(sock, 8))
        if not masked:
            raise ConnectionError("client frames must be masked")
        mask = _recv_exact(sock, 4)
        payload = bytearray(_recv_exact(sock, length))
        for i in range(length):
            payload[i] ^= mask[i & 3]
        if opcode == 0x8:  # close
            with client.send_lock:
                try:
                    sock.sendall(_ws_control_frame(0x8, bytes(payload[:125])))
                except OSError:
                    pass
            return None
        if opcode == 0x9:  # ping
            with client.send_lock:
                sock.sendall(_ws_control_frame(0xA, bytes(payload)))
            continue
        if opcode == 0xA:  # pong
            continue
        if opcode in (0x1, 0x2, 0x0):
            message.extend(payload)
            if fin:
                return bytes(message)
            continue
        raise ConnectionError(f"unsupported opcode {opcode}")


class SteeringServer:
    """TCP/WebSocket front end around one SteeringSimulation loop.

    The loop ticks at the frame rate: drain commands, advance the
    simulation by steps_per_second/fps steps, broadcast one frame. Paused
    simulations keep broadcasting (same step number), so clients stay live.
    """

    def __init__(self, cfg: SimConfig, host: str = "127.0.0.1", port: int = 8700,
                 fps: float = 10.0, steps_per_second: int = 200):
        if fps <= 0:
            raise ValueError("fps must be positive")
        self.steering = SteeringSimulation(cfg, steps_per_second)
        self.host = host
        self.port = port
        self.fps = fps
        self._commands: "queue.Queue[ClientCommand]" = queue.Queue()
        self._clients: list[_Client] = []
        self._clients_lock = threading.Lock()
        self._stop = threading.Event()
        self._listener: socket.socket | None = None
        self._threads: list[threading.Thread] = []

    def start(self) -> None:
        """Bind and launch the accept and simulation threads. OSError if busy."""
        listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        listener.bind((self.host, self.port))
        listener.listen(8)
        self._listener = listener
        self.port = listener.getsockname()[1]
        for target in (self._accept_loop, self._sim_loop):
            t = threading.Thread(target=target, daemon=True)
            t.start()
            self._threads.append(t)

    def join(self) -> None:
        """Block the calling thread until stop(); interruptible by Ctrl-C."""
        while not self._stop.wait(timeout=0.2):
            pass

    def stop(self) -> None:
        self._stop.set()
        if self._listener is not None:
            self._listener.close()
        with self._clients_lock:
            clients = list(self._clients)
            self._clients.clear()
        for c in clients:
            c.close()
        for t in self._threads:
            t.join(timeout=2.0)

    # -- simulation loop ----------------------------------------------------

    def _sim_loop(self) -> None:
        tick = 1.0 / self.fps
        next_tick = time.monotonic()
        while not self._stop.is_set():
            while True:
                try:
                    command = self._commands.get_nowait()
                except queue.Empty:
                    break
                self.steering.apply(command)
            steps = max(1, round(self.steering.steps_per_second / self.fps))
            self.steering.advance(steps)
            self._broadcast(encode_frame(self.steering.make_frame()))
            next_tick += tick
            delay = next_tick - time.monotonic()
            if delay > 0:
                self._stop.wait(timeout=delay)
            else:
                next_tick = time.monotonic()

    def _broadcast(self, line: bytes) -> None:
        with self._clients_lock:
            clients = list(self._clients)
        for client in clients:
            try:
                client.send_line(line)
            except OSError:
                self._drop(client)

    def _drop(self, client: _Client) -> None:
        with self._clients_lock:
            if client in self._clients:
                self._clients.remove(client)
        client.close()

    # -- connection handling ------------------------------------------------

    def _accept_loop(self) -> None:
        assert self._listener is not None
        while not self._stop.is_set():
            try:
                sock, _addr = self._listener.accept()
            except OSError:
                return  # listener closed by stop()
            t = threading.Thread(target=self._serve_client, args=(sock,), daemon=True)
            t.start()

    def _serve_client(self, sock: socket.socket) -> None:
        client = None
        try:
            sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            # WebSocket clients speak first (the HTTP upgrade); a raw client
            # may stay silent and just listen, so a quiet peer is raw TCP.
            sock.settimeout(1.0)
            try:
                first = sock.recv(4, socket.MSG_PEEK)
            except (TimeoutError, socket.timeout):
                first = b""
            finally:
                sock.settimeout(None)
            if first.startswith(b"GET"):
                _ws_handshake(sock, b"")
                client = _Client(sock, is_websocket=True)
            else:
                client = _Client(sock, is_websocket=False)
            with self._clients_lock:
                self._clients.append(client)
            if client.is_websocket:
                self._read_websocket(client)
            else:
                self._read_lines(client)
        except (OSError, ConnectionError):
            pass
        finally:
            if client is not None:
                self._drop(client)
            else:
                sock.close()

    def _read_lines(self, client: _Client) -> None:
        buf = bytearray()
        while not self._stop.is_set():
            chunk = client.sock.recv(4096)
            if not chunk:
                return
            buf.extend(chunk)
            while True:
                idx = buf.find(b"\n")
                if idx < 0:
                    break
                line = bytes(buf[:idx])
                del buf[:idx + 1]
                self._handle_line(client, line)

    def _read_websocket(self, client: _Client) -> None:
        while not self._stop.is_set():
            message = _ws_read_message(client)
            if message is None:
                return
            for line in message.split(b"\n"):
                if line.strip():
                    self._handle_line(client, line)

    def _handle_line(self, client: _Client, line: bytes) -> None:
        if not line.strip():
            return
        try:
            command = decode_command(line)
        except CommandDecodeError as exc:
            notice = json.dumps({"type": "error", "message": str(exc)},
                                separators=(",", ":")) + "\n"
            try:
                client.send_line(notice.encode("utf-8"))
            except OSError:
                self._drop(client)
            return
        self._commands.put(command)
