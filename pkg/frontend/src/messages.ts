// Wire schema shared with the recognition service. One JSON text message per
// signal frame; field names are part of the protocol.

export interface FrameMessage {
  type: "frame";
  t: number;
  features: [number, number, number, number, number, number];
  speed: number;
  present: boolean;
}

export interface ResultMessage {
  type: "result";
  t: number;
  meta: "PostureState" | "TransitionState" | "NoHand";
  label?: string;
  command?: number;
  margin?: number;
}

export interface ErrorMessage {
  type: "error";
  code: string;
  detail: string;
}

export type ServiceMessage = ResultMessage | ErrorMessage;

export function encodeFrame(msg: FrameMessage): string {
  return JSON.stringify(msg);
}

export function decodeServiceMessage(raw: string): ServiceMessage {
  const parsed = JSON.parse(raw);
  if (parsed.type === "result" || parsed.type === "error") {
    return parsed as ServiceMessage;
  }
  throw new Error(`unexpected message type: ${String(parsed.type)}`);
}
