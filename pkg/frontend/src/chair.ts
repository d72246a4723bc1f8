// Unicycle kinematics for the on-screen wheelchair; the pose changes only
// through applyCommand steps and stays inside the arena.

export interface WheelchairPose {
  x: number; // meters
  y: number;
  heading: number; // radians
  v: number; // m/s
  omega: number; // rad/s
}

export interface ChairParams {
  v0: number; // cruise speed, m/s
  omega0: number; // turn rate, rad/s
  arenaWidth: number; // meters
  arenaHeight: number;
}

export const DEFAULT_PARAMS: ChairParams = {
  v0: 1.2,
  omega0: 0.9,
  arenaWidth: 16,
  arenaHeight: 12,
};

export function initialPose(params: ChairParams = DEFAULT_PARAMS): WheelchairPose {
  return { x: params.arenaWidth / 2, y: params.arenaHeight / 2, heading: 0, v: 0, omega: 0 };
}

/** Steering semantics: 1 forward, 2 turn left, 3 turn right, 4 stop,
 * 5 reverse. Turning keeps the current speed; stop zeroes both rates. */
export function applyCommand(
  pose: WheelchairPose,
  command: number,
  dt: number,
  params: ChairParams = DEFAULT_PARAMS,
): WheelchairPose {
  if (dt <= 0) throw new Error(`dt must be positive, got ${dt}`);
  let { v, omega } = pose;
  switch (command) {
    case 1:
      v = params.v0;
      omega = 0;
      break;
    case 2:
      omega = params.omega0;
      break;
    case 3:
      omega = -params.omega0;
      break;
    case 4:
      v = 0;
      omega = 0;
      break;
    case 5:
      v = -params.v0;
      omega = 0;
      break;
    default:
      throw new Error(`unknown steering command ${command}`);
  }
  const heading = pose.heading + omega * dt;
  let x = pose.x + v * Math.cos(heading) * dt;
  let y = pose.y + v * Math.sin(heading) * dt;
  x = Math.min(Math.max(x, 0), params.arenaWidth);
  y = Math.min(Math.max(y, 0), params.arenaHeight);
  return { x, y, heading, v, omega };
}
