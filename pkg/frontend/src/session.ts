/** Client session state machine over one websocket.
 *
 * The client never simulates: view state holds exactly what the server
 * last said, plus a step log so a dropped connection still leaves the
 * partial episode on screen.
 */
import {
  decodeServer,
  encodeReset,
  encodeStep,
  type Done,
  type ErrorMsg,
  type Obs,
  type ResetRequest,
} from "./protocol";

export type Connection = "idle" | "connecting" | "open" | "closed";

export interface StepRecord {
  i: number;
  action: number;
  reward: number;
  done: boolean;
  digest: string;
}

export interface EpisodeLog {
  request: ResetRequest;
  resetDigest: string;
  startedAt: string;
  steps: StepRecord[];
  cumulative: number;
}

export interface ViewState {
  connection: Connection;
  obs: Obs | null;
  episode: EpisodeLog | null;
  done: Done | null;
  error: ErrorMsg | { code: "client"; message: string } | null;
}

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

type Listener = (state: ViewState) => void;

export class SessionClient {
  private socket: SocketLike | null = null;
  private listeners: Listener[] = [];
  private pendingAction: number | null = null;
  private pendingReset: ResetRequest | null = null;

  state: ViewState = {
    connection: "idle",
    obs: null,
    episode: null,
    done: null,
    error: null,
  };

  constructor(
    private readonly url: string,
    private readonly factory: SocketFactory,
  ) {}

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }

  private emit(): void {
    for (const fn of this.listeners) fn(this.state);
  }

  connect(): Promise<void> {
    this.state = { ...this.state, connection: "connecting" };
    this.emit();
    return new Promise((resolve, reject) => {
      const sock = this.factory(this.url);
      this.socket = sock;
      sock.onopen = () => {
        this.state = { ...this.state, connection: "open" };
        this.emit();
        resolve();
      };
      sock.onerror = () => {
        if (this.state.connection === "connecting") {
          reject(new Error("connection failed"));
        }
      };
      sock.onclose = () => {
        // A drop mid-episode keeps the log; only the link status changes.
        this.state = { ...this.state, connection: "closed" };
        this.emit();
      };
      sock.onmessage = (ev) => this.receive(String(ev.data));
    });
  }

  close(): void {
    this.socket?.close();
  }

  reset(req: ResetRequest): void {
    if (this.state.connection !== "open") {
      this.clientError("not connected");
      return;
    }
    this.pendingReset = req;
    this.pendingAction = null;
    this.socket!.send(encodeReset(req));
  }

  step(action: number): void {
    if (this.state.connection !== "open") {
      this.clientError("not connected");
      return;
    }
    if (this.state.obs === null || this.state.obs.done) {
      this.clientError("no live episode to step");
      return;
    }
    this.pendingAction = action;
    this.socket!.send(encodeStep(action));
  }

  private clientError(message: string): void {
    this.state = { ...this.state, error: { code: "client", message } };
    this.emit();
  }

  private receive(raw: string): void {
    let msg;
    try {
      msg = decodeServer(raw);
    } catch (err) {
      this.state = {
        ...this.state,
        error: { code: "client", message: `off-schema frame: ${err}` },
      };
      this.emit();
      return;
    }
    if (msg.type === "error") {
      // Board and log stay as they were; only the banner changes.
      this.state = { ...this.state, error: msg };
    } else if (msg.type === "done") {
      this.state = { ...this.state, done: msg };
    } else if (msg.step === 0) {
      this.state = {
        ...this.state,
        obs: msg,
        done: null,
        error: null,
        episode: {
          request: this.pendingReset ?? { env: "?" },
          resetDigest: msg.digest,
          startedAt: new Date().toISOString(),
          steps: [],
          cumulative: 0,
        },
      };
    } else {
      const ep = this.state.episode;
      const rec: StepRecord = {
        i: msg.step - 1,
        action: this.pendingAction ?? -1,
        reward: msg.reward ?? 0,
        done: msg.done,
        digest: msg.digest,
      };
      this.state = {
        ...this.state,
        obs: msg,
        error: null,
        episode: ep && {
          ...ep,
          steps: [...ep.steps, rec],
          cumulative: ep.cumulative + (msg.reward ?? 0),
        },
      };
    }
    this.emit();
  }
}
