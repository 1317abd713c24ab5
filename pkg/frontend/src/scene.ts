/**
 * Three.js scene: the levitation volume to scale, the bead, the trap marker,
 * pointing-study targets and game props.  World units are metres; the
 * camera orbits so depth is readable despite the flat screen.
 */

import * as THREE from "three";
import { OrbitControls } from "three/examples/jsm/controls/OrbitControls.js";
import { Vec3, VOLUME } from "./protocol";

export interface SceneProps {
  targets?: { center: Vec3; width: number }[];
  dangerPlane?: boolean;
}

export class LevitationScene {
  readonly renderer: THREE.WebGLRenderer;
  readonly scene: THREE.Scene;
  readonly camera: THREE.PerspectiveCamera;
  readonly controls: OrbitControls;
  private particle: THREE.Mesh;
  private trapMarker: THREE.Mesh;
  private racketDisc: THREE.Mesh;
  private gunRay: THREE.Line;

  constructor(canvas: HTMLCanvasElement, props: SceneProps = {}) {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.renderer.setPixelRatio(window.devicePixelRatio);
    this.scene = new THREE.Scene();
    this.scene.background = new THREE.Color(0x10131a);

    this.camera = new THREE.PerspectiveCamera(45, 1, 0.01, 2.0);
    this.camera.position.set(0.12, 0.09, 0.26);
    this.controls = new OrbitControls(this.camera, canvas);
    this.controls.target.set(0, 0, 0);
    this.controls.enablePan = false;
    this.controls.minDistance = 0.1;
    this.controls.maxDistance = 0.8;

    const ambient = new THREE.AmbientLight(0xffffff, 0.6);
    const key = new THREE.DirectionalLight(0xffffff, 1.2);
    key.position.set(0.2, 0.4, 0.3);
    this.scene.add(ambient, key);

    // working volume, drawn 1:1 (0.14 x 0.106 x 0.09 m)
    const size = [
      VOLUME.hi[0] - VOLUME.lo[0],
      VOLUME.hi[1] - VOLUME.lo[1],
      VOLUME.hi[2] - VOLUME.lo[2],
    ];
    const box = new THREE.BoxGeometry(size[0], size[1], size[2]);
    const edges = new THREE.LineSegments(
      new THREE.EdgesGeometry(box),
      new THREE.LineBasicMaterial({ color: 0x4d6a92 }));
    this.scene.add(edges);

    // emitter panels above and below the volume
    for (const sign of [-1, 1]) {
      const panel = new THREE.Mesh(
        new THREE.BoxGeometry(size[0], 0.004, size[2]),
        new THREE.MeshStandardMaterial({ color: 0x2b3442, roughness: 0.8 }));
      panel.position.y = sign * (size[1] / 2 + 0.012);
      this.scene.add(panel);
    }

    // the bead: drawn bigger than 2 mm so it reads on screen
    this.particle = new THREE.Mesh(
      new THREE.SphereGeometry(0.003, 24, 16),
      new THREE.MeshStandardMaterial({ color: 0xf5f5f0, roughness: 0.35 }));
    this.scene.add(this.particle);

    this.trapMarker = new THREE.Mesh(
      new THREE.SphereGeometry(0.0015, 12, 8),
      new THREE.MeshBasicMaterial({ color: 0x44dd88, transparent: true, opacity: 0.8 }));
    this.scene.add(this.trapMarker);

    for (const target of props.targets ?? []) {
      const sphere = new THREE.Mesh(
        new THREE.SphereGeometry(target.width / 2, 20, 12),
        new THREE.MeshBasicMaterial({ color: 0xffaa33, wireframe: true,
                                      transparent: true, opacity: 0.4 }));
      sphere.position.set(...target.center);
      this.scene.add(sphere);
      // the "target stick" prop under the invisible sphere
      const stickHeight = target.center[1] - VOLUME.lo[1];
      const stick = new THREE.Mesh(
        new THREE.CylinderGeometry(0.0006, 0.0006, stickHeight, 8),
        new THREE.MeshStandardMaterial({ color: 0x111111 }));
      stick.position.set(target.center[0], VOLUME.lo[1] + stickHeight / 2, target.center[2]);
      this.scene.add(stick);
    }

    if (props.dangerPlane) {
      const plane = new THREE.Mesh(
        new THREE.PlaneGeometry(size[2], size[1]),
        new THREE.MeshBasicMaterial({ color: 0xdd3333, transparent: true,
                                      opacity: 0.18, side: THREE.DoubleSide }));
      plane.rotation.y = Math.PI / 2;
      this.scene.add(plane);
    }

    this.racketDisc = new THREE.Mesh(
      new THREE.CylinderGeometry(0.015, 0.015, 0.0012, 32),
      new THREE.MeshStandardMaterial({ color: 0x3388ff, transparent: true, opacity: 0.75 }));
    this.racketDisc.visible = false;
    this.scene.add(this.racketDisc);

    const rayGeometry = new THREE.BufferGeometry().setFromPoints(
      [new THREE.Vector3(), new THREE.Vector3()]);
    this.gunRay = new THREE.Line(
      rayGeometry, new THREE.LineBasicMaterial({ color: 0xff4444 }));
    this.gunRay.visible = false;
    this.scene.add(this.gunRay);
  }

  resize(width: number, height: number) {
    this.renderer.setSize(width, height, false);
    this.camera.aspect = width / height;
    this.camera.updateProjectionMatrix();
  }

  setParticle(pos: Vec3, stale = false) {
    this.particle.position.set(...pos);
    (this.particle.material as THREE.MeshStandardMaterial).color.set(
      stale ? 0x777777 : 0xf5f5f0);
  }

  setTrap(pos: Vec3) {
    this.trapMarker.position.set(...pos);
  }

  setRacket(pos: Vec3, normal: Vec3) {
    this.racketDisc.visible = true;
    this.racketDisc.position.set(...pos);
    const up = new THREE.Vector3(0, 1, 0);
    const n = new THREE.Vector3(...normal).normalize();
    this.racketDisc.quaternion.setFromUnitVectors(up, n);
  }

  setGunRay(origin: Vec3, dir: Vec3, hot: boolean) {
    this.gunRay.visible = true;
    const points = [
      new THREE.Vector3(...origin),
      new THREE.Vector3(...origin).addScaledVector(new THREE.Vector3(...dir), 0.5),
    ];
    this.gunRay.geometry.setFromPoints(points);
    (this.gunRay.material as THREE.LineBasicMaterial).color.set(hot ? 0xffff44 : 0xff4444);
  }

  /** Pointer ray cast onto the camera-facing plane through the given depth. */
  pointerOnPlane(ndcX: number, ndcY: number, depthZ: number): Vec3 {
    const raycaster = new THREE.Raycaster();
    raycaster.setFromCamera(new THREE.Vector2(ndcX, ndcY), this.camera);
    const plane = new THREE.Plane(new THREE.Vector3(0, 0, 1), -depthZ);
    const hit = new THREE.Vector3();
    raycaster.ray.intersectPlane(plane, hit);
    return [hit.x, hit.y, depthZ];
  }

  render() {
    this.controls.update();
    this.renderer.render(this.scene, this.camera);
  }
}
