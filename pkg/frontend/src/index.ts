export { LiversegError, cliCommand, runCli } from "./runner.js";
export { niftiBytes, writeNifti, type VolumeArray } from "./nifti.js";
export {
  EarlyStop,
  OneCycle,
  Plateau,
  simulateTrajectory,
  type OneCycleOptions,
  type PlateauOptions,
  type TrajectoryRow,
} from "./schedulers.js";
export { evaluateCase, type MetricReport } from "./metrics.js";
